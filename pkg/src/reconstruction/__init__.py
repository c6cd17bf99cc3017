"""3D reconstruction"""
