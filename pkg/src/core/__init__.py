"""Navigation control loop"""
