from satsec.cli import main

main()
