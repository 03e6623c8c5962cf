from cvmaps.main import main

raise SystemExit(main())
