from rplsh.cli import main

main()
