"""
Data models for the tree witness engine.
"""
