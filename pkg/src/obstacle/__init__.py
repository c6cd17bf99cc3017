"""Obstacle segmentation and decisions"""
