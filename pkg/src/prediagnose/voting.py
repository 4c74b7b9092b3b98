"""Majority voting and temporal sliding-window smoothing."""

from __future__ import annotations


def majority_vote(labels) -> int:
    """Majority of {0,1} labels; ties go to the positive class."""
    labels = list(labels)
    if not labels:
        raise ValueError("empty label sequence")
    ones = sum(labels)
    return 1 if 2 * ones >= len(labels) else 0


def sliding_window_vote(frame_labels, window: int) -> list[int]:
    """output[i] = majority of frames [i, i+window); window must be odd."""
    frame_labels = list(frame_labels)
    if not frame_labels:
        raise ValueError("empty label sequence")
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be odd and >= 1")
    if window > len(frame_labels):
        raise ValueError("window larger than sequence")
    return [
        majority_vote(frame_labels[i : i + window])
        for i in range(len(frame_labels) - window + 1)
    ]


def sequence_vote(frame_labels, window: int) -> int:
    """Final sequence decision: majority over the sliding-window outputs.

    Sequences shorter than the window fall back to a simple majority.
    """
    frame_labels = list(frame_labels)
    if window > len(frame_labels):
        return majority_vote(frame_labels)
    return majority_vote(sliding_window_vote(frame_labels, window))
