# Copyright 2026 The ppseg Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Panoptic part segmentation metrics, label fusion and decoder simulation."""

import json

import numpy as np

from ._ppseg import (
    PpsegError,
    PwqComponents,
    Taxonomy,
    __version__,
    _evaluate_json,
    _oracle_json,
    check_invariants,
    compute_pwq,
    decode_uid,
    dice_loss,
    encode_uid,
    hungarian,
    mask_ce_loss,
    merge,
    part_whole_quality,
    ppsm_bytes,
    read_ppsm,
    simulate,
    split,
    write_ppsm,
)


def _maps(maps):
    return [np.ascontiguousarray(m, dtype=np.uint32) for m in maps]


def evaluate(gt, pred, taxonomy, threads=1, void_fp_rule=True, miou_full_label_set=False):
    """Evaluates aligned lists of (H, W) uid maps and returns the report dict."""
    return json.loads(
        _evaluate_json(_maps(gt), _maps(pred), taxonomy, threads, void_fp_rule, miou_full_label_set)
    )


def oracle(gt, pred_panoptic, pred_parts, taxonomy, threads=1):
    """Returns the none / panoptic_gt / part_gt reports as a list of dicts."""
    return json.loads(
        _oracle_json(_maps(gt), _maps(pred_panoptic), _maps(pred_parts), taxonomy, threads)
    )
