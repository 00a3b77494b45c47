extensions = ["sphinx_ape"]
