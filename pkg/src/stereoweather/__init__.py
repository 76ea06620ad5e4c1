"""stereoweather: adverse-weather stereo data generation and matching toolkit."""

__version__ = "0.1.0"
