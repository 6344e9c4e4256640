from dimerlab.lab.cli import main

main()
