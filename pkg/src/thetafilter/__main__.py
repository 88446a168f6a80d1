from thetafilter.cli import main

raise SystemExit(main())
