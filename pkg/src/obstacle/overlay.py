"""
Detection Overlay
Draws blob boxes, centres, the half split and the decision on an image
"""

from typing import Sequence, Union

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from src.obstacle.detector import Blob, Decision
from src.stereo.images import ColorImage, GrayImage

BOX_COLOR = (255, 64, 64)
CENTER_COLOR = (64, 255, 64)
SPLIT_COLOR = (80, 150, 255)
LABEL_COLOR = (255, 255, 0)
CROSS = 3


def draw_detections(image: Union[GrayImage, ColorImage], blobs: Sequence[Blob],
                    decision: Decision) -> ColorImage:
    """Annotated RGB copy of the image"""
    canvas = Image.fromarray(image.data).convert("RGB")
    draw = ImageDraw.Draw(canvas)
    width, height = canvas.size

    split = width // 2
    draw.line([(split, 0), (split, height - 1)], fill=SPLIT_COLOR, width=1)

    for blob in blobs:
        draw.rectangle(list(blob.bbox), outline=BOX_COLOR, width=2)
        cx, cy = blob.centroid
        draw.line([(cx - CROSS, cy), (cx + CROSS, cy)], fill=CENTER_COLOR, width=1)
        draw.line([(cx, cy - CROSS), (cx, cy + CROSS)], fill=CENTER_COLOR, width=1)

    draw.text((4, 4), str(decision), fill=LABEL_COLOR, font=ImageFont.load_default())
    return ColorImage(np.asarray(canvas, dtype=np.uint8).copy())
