"""QAOA MaxCut simulation, knowledge tables and automated inequality conjectures."""
__version__ = "0.1.0"
