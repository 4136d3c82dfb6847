"""
Detection and tracking evaluation: AP and MOTA
"""
import numpy as np

from sbn3d.detection import iou


class GroundTruth(object):
    """Annotated shadow boxes

    Args:
        frames (dict): frame index -> list of (id, (x, y, w, h))
        nframes (int [optional]): number of annotated frames; frames without
            objects still count as annotated
    """

    def __init__(self, frames, nframes=None):
        self.frames = {}
        for f, objs in frames.items():
            self.frames[int(f)] = [(int(i), tuple(int(v) for v in box)) for i, box in objs]
        if nframes is None:
            nframes = max(self.frames) + 1 if self.frames else 0
        self.nframes = nframes

    def objects(self, frame):
        return self.frames.get(frame, [])

    def boxes(self, frame):
        return [box for _, box in self.objects(frame)]

    def ids(self):
        return sorted(set(i for objs in self.frames.values() for i, _ in objs))

    def total(self):
        """Number of annotated boxes over all frames"""
        return sum(len(objs) for objs in self.frames.values())

    def chips(self):
        """frame -> list of boxes, the form `stack_metrics` takes"""
        return {f: self.boxes(f) for f in self.frames}

    def to_dict(self):
        return {'frames': [
            {'frame': f, 'objects': [
                {'id': i, 'x': b[0], 'y': b[1], 'w': b[2], 'h': b[3]} for i, b in self.objects(f)
            ]} for f in range(self.nframes)
        ]}

    @classmethod
    def from_dict(cls, doc):
        frames = {}
        for entry in doc['frames']:
            frames[int(entry['frame'])] = [
                (o['id'], (o['x'], o['y'], o['w'], o['h'])) for o in entry['objects']
            ]
        nframes = max(frames) + 1 if frames else 0
        return cls(frames, nframes=nframes)

    def __eq__(self, other):
        if not isinstance(other, GroundTruth):
            return NotImplemented
        keys = set(self.frames) | set(other.frames)
        return self.nframes == other.nframes and all(self.objects(k) == other.objects(k) for k in keys)

    def __repr__(self):
        return "GroundTruth: {} boxes, {} ids over {} frames".format(
            self.total(), len(self.ids()), self.nframes)


def _check_gt(gt):
    if gt.total() == 0:
        raise ValueError("ground truth is empty")


def _match_detections(dets, gt, iou_thresh):
    """Greedy one-to-one matching in descending score order

    Returns:
        tuple: (ordered detections, boolean hit per detection)
    """

    order = sorted(dets, key=lambda d: (-d.score, d.frame, d.box[0], d.box[1]))
    taken = set()
    hits = []
    for d in order:
        best, best_ov = None, iou_thresh
        for k, box in enumerate(gt.boxes(d.frame)):
            if (d.frame, k) in taken:
                continue
            ov = iou(d.box, box)
            if ov >= best_ov and (best is None or ov > best_ov):
                best, best_ov = k, ov
        if best is not None:
            taken.add((d.frame, best))
        hits.append(best is not None)
    return order, np.array(hits, dtype=bool)


def detection_counts(dets, gt, iou_thresh=0.5):
    """True/false positives, misses, precision and recall

    Returns:
        dict: tp, fp, fn, precision, recall
    """

    _check_gt(gt)
    _, hits = _match_detections(dets, gt, iou_thresh)
    tp = int(np.sum(hits))
    fp = len(hits) - tp
    fn = gt.total() - tp
    return {
        'tp': tp, 'fp': fp, 'fn': fn,
        'precision': tp / float(tp + fp) if tp + fp > 0 else 0.,
        'recall': tp / float(gt.total()),
    }


def precision_recall(dets, gt, iou_thresh=0.5):
    """Precision and recall after each detection in descending score order"""

    _check_gt(gt)
    _, hits = _match_detections(dets, gt, iou_thresh)
    tp = np.cumsum(hits)
    fp = np.cumsum(~hits)
    recall = tp / float(gt.total())
    precision = tp / np.maximum(tp + fp, np.finfo(np.float64).eps)
    return precision, recall


def average_precision(dets, gt, iou_thresh=0.5):
    """All-point interpolated average precision

    The area under the precision-recall curve after replacing each
    precision by the maximum precision at any higher recall.

    Args:
        dets (list): scored Detection objects
        gt (GroundTruth): annotations
        iou_thresh (float): minimum IoU for a true positive

    Returns:
        float: AP in [0, 1]
    """

    precision, recall = precision_recall(dets, gt, iou_thresh)
    if len(precision) == 0:
        return 0.

    mrec = np.concatenate(([0.], recall, [1.]))
    mpre = np.concatenate(([0.], precision, [0.]))
    mpre = np.maximum.accumulate(mpre[::-1])[::-1]
    i = np.flatnonzero(mrec[1:] != mrec[:-1])
    return float(np.sum((mrec[i + 1] - mrec[i]) * mpre[i + 1]))


def tracking_counts(tracks, gt, iou_thresh=0.5):
    """Misses, false positives and identity switches over all frames

    Correspondences from earlier frames are kept while the pair still
    overlaps by ``iou_thresh``; the rest are matched greedily by IoU. An
    identity switch is a ground-truth target whose matched track id differs
    from the one it was last matched to.

    Returns:
        dict: fp, fn, idsw, gt
    """

    _check_gt(gt)
    frames = set(gt.frames)
    for t in tracks:
        frames.update(f for f, _ in t.observations)

    last_match = {}
    fp = fn = idsw = 0
    for frame in sorted(frames):
        objs = gt.objects(frame)
        hyps = {}
        for t in tracks:
            box = t.box_at(frame)
            if box is not None:
                hyps[t.id] = box

        matched = {}
        used = set()
        for gid, gbox in objs:
            tid = last_match.get(gid)
            if tid in hyps and tid not in used and iou(gbox, hyps[tid]) >= iou_thresh:
                matched[gid] = tid
                used.add(tid)

        pairs = []
        for gid, gbox in objs:
            if gid in matched:
                continue
            for tid, hbox in hyps.items():
                if tid in used:
                    continue
                ov = iou(gbox, hbox)
                if ov >= iou_thresh and ov > 0:
                    pairs.append((-ov, gbox[0], gbox[1], tid, gid))
        for _, _, _, tid, gid in sorted(pairs):
            if gid in matched or tid in used:
                continue
            matched[gid] = tid
            used.add(tid)

        for gid, tid in matched.items():
            if gid in last_match and last_match[gid] != tid:
                idsw += 1
            last_match[gid] = tid

        fn += len(objs) - len(matched)
        fp += len(hyps) - len(used)

    return {'fp': fp, 'fn': fn, 'idsw': idsw, 'gt': gt.total()}


def mota(tracks, gt, iou_thresh=0.5):
    """Multiple object tracking accuracy

    1 - (FN + FP + IDSW) / GT summed over frames.
    """

    counts = tracking_counts(tracks, gt, iou_thresh)
    return 1. - (counts['fn'] + counts['fp'] + counts['idsw']) / float(counts['gt'])
