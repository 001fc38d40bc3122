#!/usr/bin/env python3
# Copyright 2026 The deface-bench Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates data/region_map_v1.csv from the MediaPipe face-mesh topology.

Seed landmarks (contours published with MediaPipe plus a handful of hand-picked
interior points) are labelled directly. The tesselation is laid out in the plane
with a Tutte embedding (face oval pinned to the unit circle) and every remaining
landmark takes the region of the nearest seed in that layout.

usage: gen_region_map.py path/to/face_mesh_connections.py > data/region_map_v1.csv
"""

import collections
import importlib.util
import sys

import numpy as np


def load_connections(path):
    spec = importlib.util.spec_from_file_location("face_mesh_connections", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


FACE_OVAL = [10, 338, 297, 332, 284, 251, 389, 356, 454, 323, 361, 288, 397,
             365, 379, 378, 400, 377, 152, 148, 176, 149, 150, 136, 172, 58,
             132, 93, 234, 127, 162, 21, 54, 103, 67, 109]


def tutte_layout(adj, boundary, n=468):
    pos = np.zeros((n, 2))
    for k, i in enumerate(boundary):
        t = 2.0 * np.pi * k / len(boundary)
        pos[i] = [np.sin(t), np.cos(t)]
    fixed = set(boundary)
    free = [i for i in range(n) if i not in fixed]
    col = {v: j for j, v in enumerate(free)}
    lap = np.zeros((len(free), len(free)))
    rhs = np.zeros((len(free), 2))
    for v in free:
        r = col[v]
        lap[r, r] = len(adj[v])
        for u in adj[v]:
            if u in fixed:
                rhs[r] += pos[u]
            else:
                lap[r, col[u]] -= 1.0
    sol = np.linalg.solve(lap, rhs)
    for v in free:
        pos[v] = sol[col[v]]
    return pos


def flatten(edges):
    out = set()
    for a, b in edges:
        out.update((a, b))
    return sorted(out)


def main():
    fm = load_connections(sys.argv[1])
    seeds = collections.OrderedDict()
    seeds["lips"] = flatten(fm.FACEMESH_LIPS)
    seeds["left_eye"] = flatten(fm.FACEMESH_LEFT_EYE)
    seeds["right_eye"] = flatten(fm.FACEMESH_RIGHT_EYE)
    seeds["left_eyebrow"] = flatten(fm.FACEMESH_LEFT_EYEBROW)
    seeds["right_eyebrow"] = flatten(fm.FACEMESH_RIGHT_EYEBROW)
    seeds["nose_bridge"] = [168, 6, 197, 195, 122, 351, 193, 417, 196, 419]
    seeds["nose_tip"] = [5, 4, 1, 19, 94, 2, 98, 97, 326, 327, 294, 278, 344,
                         440, 275, 45, 220, 115, 48, 64]
    seeds["forehead"] = [10, 338, 297, 332, 284, 109, 67, 103, 54, 21, 151, 9,
                         108, 69, 104, 68, 337, 299, 333, 298]
    seeds["chin"] = [152, 148, 176, 377, 400, 175, 199, 200, 171, 396]
    seeds["jaw"] = [251, 389, 356, 454, 323, 361, 288, 397, 365, 379, 378,
                    149, 150, 136, 172, 58, 132, 93, 234, 127, 162]
    seeds["left_cheek"] = [425, 411, 280, 352, 346, 347, 330, 266, 426, 436]
    seeds["right_cheek"] = [205, 187, 50, 123, 117, 118, 101, 36, 206, 216]

    adj = collections.defaultdict(set)
    for a, b in fm.FACEMESH_TESSELATION:
        adj[a].add(b)
        adj[b].add(a)
    pos = tutte_layout(adj, FACE_OVAL)

    region = {}
    for name, idxs in seeds.items():
        for i in idxs:
            region.setdefault(i, name)
    seed_ids = sorted(region)
    seed_pos = pos[seed_ids]
    for i in range(468):
        if i in region:
            continue
        d = np.linalg.norm(seed_pos - pos[i], axis=1)
        region[i] = region[seed_ids[int(np.argmin(d))]]

    assert sorted(region) == list(range(468)), "tesselation does not reach all landmarks"
    print("# deface-bench landmark region map, version 1")
    print("idx,region")
    for i in range(468):
        print(f"{i},{region[i]}")


if __name__ == "__main__":
    main()
