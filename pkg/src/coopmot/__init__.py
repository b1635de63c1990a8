"""coopmot: cooperative 3D multi-object tracking toolkit.

Fuses multi-vehicle 3D detections by least-squares smoothing over the
fully connected detection graph, associates the refined boxes to
Kalman-filtered tracks in one or two stages, and scores the result with
CLEAR/AMOTA-family metrics.
"""

__version__ = "0.1.0"
