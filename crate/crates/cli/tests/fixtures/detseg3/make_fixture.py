"""Writes the three-instance detection/segmentation fixture."""
import json
import numpy as np
from PIL import Image

W = H = 16


def rect(x0, y0, x1, y1):
    m = np.zeros((H, W), np.uint8)
    m[y0:y1, x0:x1] = 1
    return m


def save(name, m):
    Image.fromarray(m, mode="L").save(name)
    return name


notched = rect(9, 9, 15, 15)
notched[9:11, 13:15] = 0

gts = [
    dict(image_id="a", category="car", bbox=[2, 2, 8, 8], amodal_mask=save("gt0.png", rect(2, 2, 8, 8))),
    dict(image_id="a", category="car", bbox=[9, 9, 15, 15], amodal_mask=save("gt1.png", notched)),
    dict(image_id="b", category="person", bbox=[1, 1, 6, 10], amodal_mask=save("gt2.png", rect(1, 1, 6, 10))),
]
preds = [
    dict(image_id="a", category="car", score=0.9, bbox=[2, 2, 8, 8], mask=save("p0.png", rect(2, 2, 8, 8))),
    dict(image_id="a", category="car", score=0.8, bbox=[9, 9, 15, 15], mask=save("p1.png", rect(9, 9, 11, 11))),
    dict(image_id="a", category="car", score=0.7, bbox=[3, 3, 9, 9], mask=save("p2.png", rect(3, 3, 9, 9))),
    dict(image_id="b", category="person", score=0.6, bbox=[1, 1, 6, 10], mask=save("p3.png", rect(1, 1, 6, 10))),
    dict(image_id="a", category="person", score=0.5, bbox=[1, 1, 6, 10], mask=save("p4.png", rect(1, 1, 6, 10))),
]
with open("ground_truth.jsonl", "w") as f:
    f.writelines(json.dumps(g) + "\n" for g in gts)
with open("predictions.jsonl", "w") as f:
    f.writelines(json.dumps(p) + "\n" for p in preds)
