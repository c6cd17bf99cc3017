"""Ultrasound occupancy mapping"""
