"""Deterministic block-letter test images."""

from __future__ import annotations

import numpy as np

# 5 x 7 glyph masks, one string per row
GLYPHS = {
    "C": ["01111", "10000", "10000", "10000", "10000", "10000", "01111"],
    "P": ["11110", "10001", "10001", "11110", "10000", "10000", "10000"],
    "T": ["11111", "00100", "00100", "00100", "00100", "00100", "00100"],
}


def block_text(text: str, cell: int = 8, gap: int = 1, margin: int = 2) -> np.ndarray:
    """Render ``text`` with 5x7 block glyphs; each glyph pixel is ``cell`` image pixels.

    Returns an 8-bit-range float image, 255 on strokes and 0 elsewhere.
    """
    cols = len(text) * 5 + (len(text) - 1) * gap + 2 * margin
    rows = 7 + 2 * margin
    img = np.zeros((rows, cols))
    for i, ch in enumerate(text):
        mask = np.array([[c == "1" for c in row] for row in GLYPHS[ch]])
        c0 = margin + i * (5 + gap)
        img[margin : margin + 7, c0 : c0 + 5] = mask * 255.0
    return np.kron(img, np.ones((cell, cell)))


def cpt_image() -> np.ndarray:
    return block_text("CPT")
