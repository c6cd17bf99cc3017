"""Synthetic stereo rendering"""
