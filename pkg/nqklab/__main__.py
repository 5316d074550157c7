from nqklab.cli import app

app(prog_name="nqklab")
