from nonlocal_bh.experiments.cli import main

raise SystemExit(main())
