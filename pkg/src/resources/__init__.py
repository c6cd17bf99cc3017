"""Resource management"""
