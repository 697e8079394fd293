from dangsim.cli import main

raise SystemExit(main())
