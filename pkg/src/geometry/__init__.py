"""Camera and stereo-rig geometry"""
