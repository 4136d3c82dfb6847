# Example scene setup file
#
# Two elliptical shadows on a rank-2 background with mean-centred
# Rayleigh noise. Load it with `sbn3d synth --spec rayleigh_ellipses.py`.

import numpy as np
import sbn3d

# Frame size and sub-video length
height = 64
width = 64
frames = 100

# Background: sum of two separable raised-cosine terms (rank 2)
background = [
    (sbn3d.SmoothProfile(np.sqrt(0.25), np.sqrt(0.6)), sbn3d.SmoothProfile(np.sqrt(0.25), np.sqrt(0.6))),
    (sbn3d.SmoothProfile(0.0, 0.3, cycles=2.0), sbn3d.SmoothProfile(0.0, 0.3, cycles=0.5)),
]

# Moving shadows: (height, width), top-left corner at frame 0, pixels per frame
targets = [
    sbn3d.TargetSpec((8, 10), (10., 5.), velocity=(0.3, 0.4), depth=-0.25, shape='ellipse'),
    sbn3d.TargetSpec((7, 7), (50., 50.), velocity=(-0.4, -0.3), acceleration=(0.002, 0.), depth=-0.3,
                     shape='ellipse'),
]

noise = sbn3d.NoiseModel('rayleigh', 0.015, center=True)

scene = sbn3d.SceneSpec(height, width, frames, background, targets, noise=noise, clamp=False)
