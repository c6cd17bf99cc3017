"""StereoNav - stereo vision indoor navigation stack"""
