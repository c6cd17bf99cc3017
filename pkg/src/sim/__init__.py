"""Robot platform simulation"""
