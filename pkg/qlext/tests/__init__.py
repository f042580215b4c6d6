"""qlext test suite"""
