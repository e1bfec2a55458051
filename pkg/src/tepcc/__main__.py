from tepcc.cli import main

raise SystemExit(main())
