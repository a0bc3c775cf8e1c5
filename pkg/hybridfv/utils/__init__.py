"""
Utility Module

Run configuration and coefficient expressions for hybridfv.
"""
