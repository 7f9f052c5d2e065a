"""mgmask - Motion-guided token masking for video masked autoencoders."""
