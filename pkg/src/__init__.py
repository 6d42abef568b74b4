"""
bbqlab - how a baseband quantizer in front of a transform codec costs SNR.
"""
