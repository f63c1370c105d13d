from roughseg.cli import entrypoint

entrypoint()
