"""
Greedy IoU tracker
"""
import logging

from sbn3d.detection import Detection, iou

logger = logging.getLogger(__name__)


class Track(object):
    """Sequence of boxes sharing one identity

    Args:
        id (int): positive track id

    Attributes:
        observations (list): (frame, box) pairs with strictly increasing frames
        scores (list): detection score per observation
    """

    def __init__(self, id):
        if id < 1:
            raise ValueError("Track: id must be a positive integer, got {}".format(id))
        self.id = id
        self.observations = []
        self.scores = []

    def add(self, frame, box, score=1.):
        if self.observations and frame <= self.observations[-1][0]:
            raise ValueError("Track {}: frame {} does not follow frame {}".format(
                self.id, frame, self.observations[-1][0]))
        self.observations.append((frame, tuple(box)))
        self.scores.append(score)

    @property
    def last_frame(self):
        return self.observations[-1][0]

    @property
    def last_box(self):
        return self.observations[-1][1]

    def box_at(self, frame):
        for f, box in self.observations:
            if f == frame:
                return box
        return None

    def __len__(self):
        return len(self.observations)

    def __repr__(self):
        return "Track {}: {} boxes, frames {}-{}".format(
            self.id, len(self), self.observations[0][0], self.last_frame)


def associate_tracks(dets, iou_thresh=0.3, max_missed=3):
    """Link detections into tracks

    Frame by frame, live tracks and new detections are paired greedily in
    order of descending IoU (ties by detection x, then y, then track id),
    keeping only pairs with IoU >= ``iou_thresh``. Unmatched detections
    start new tracks. A track missing for more than ``max_missed``
    consecutive frames is closed.

    Args:
        dets (list): Detection objects
        iou_thresh (float): minimum IoU for a match
        max_missed (int): frames a track may go unmatched

    Returns:
        list of Track ordered by id
    """

    byframe = {}
    for d in sorted(dets, key=Detection.sort_key):
        byframe.setdefault(d.frame, []).append(d)

    tracks = []
    live = []
    for frame in sorted(byframe):
        live = [t for t in live if frame - t.last_frame - 1 <= max_missed]
        fdets = byframe[frame]

        pairs = []
        for t in live:
            for j, d in enumerate(fdets):
                ov = iou(t.last_box, d.box)
                if ov >= iou_thresh and ov > 0:
                    pairs.append((-ov, d.box[0], d.box[1], t.id, j, t))
        pairs.sort(key=lambda p: p[:5])

        used_tracks = set()
        used_dets = set()
        for _, _, _, tid, j, t in pairs:
            if tid in used_tracks or j in used_dets:
                continue
            t.add(frame, fdets[j].box, fdets[j].score)
            used_tracks.add(tid)
            used_dets.add(j)

        for j, d in enumerate(fdets):
            if j in used_dets:
                continue
            t = Track(len(tracks) + 1)
            t.add(frame, d.box, d.score)
            tracks.append(t)
            live.append(t)

    logger.info("Linked %d detections into %d tracks", len(dets), len(tracks))
    return tracks


def tracks_to_detections(tracks):
    """Flatten tracks to Detection objects carrying their track id"""

    dets = []
    for t in tracks:
        for (frame, box), score in zip(t.observations, t.scores):
            dets.append(Detection(frame, box, score, id=t.id))
    return sorted(dets, key=lambda d: (d.frame, d.box[0], d.box[1], d.id))


def detections_to_tracks(dets):
    """Group id-carrying detections back into tracks"""

    tracks = {}
    for d in sorted(dets, key=Detection.sort_key):
        if d.id is None:
            raise ValueError("detections_to_tracks: detection {} has no track id".format(d))
        tracks.setdefault(d.id, Track(d.id)).add(d.frame, d.box, d.score)
    return [tracks[k] for k in sorted(tracks)]
