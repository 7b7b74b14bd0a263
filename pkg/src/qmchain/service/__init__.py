"""HTTP service wrapping the measurement-chain toolkit.

Import ``qmchain.service.app`` for the FastAPI application; the command
line talks to it in-process by default and over the network with a flag.
"""
