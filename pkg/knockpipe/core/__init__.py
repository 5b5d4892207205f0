"""Core functionality shared by all knockpipe modules."""
