"""Planar Veronese webs, their connections, projective structures and dual ODEs."""
__version__ = "0.1.0"
