"""Dataset refinement: invalid-frame removal, instance-count filter and
object-count balancing"""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Sequence

import numpy as np
from attrs import asdict, define, evolve

from movgan.data.annotations import AnnotationRecord

logger = logging.getLogger(__name__)


@define(frozen=True, kw_only=True)
class DatasetStats:
    videos: int
    categories: int
    valid_frames: int
    max_instance: int

    @classmethod
    def from_records(cls, records: Sequence[AnnotationRecord]) -> DatasetStats:
        return cls(
            videos=len(records),
            categories=len({name for record in records for name in record.categories}),
            valid_frames=sum(record.num_frames for record in records),
            max_instance=max((record.max_instance for record in records), default=0),
        )

    def to_dict(self) -> dict[str, int]:
        return asdict(self)


def drop_empty_frames(record: AnnotationRecord) -> AnnotationRecord:
    """record without its frames that hold no object"""
    kept = [
        position for position, boxes in enumerate(record.trajectories) if len(boxes)
    ]
    if len(kept) == record.num_frames:
        return record
    used = {item.instance_id for pos in kept for item in record.trajectories[pos]}
    return evolve(
        record,
        trajectories=tuple(record.trajectories[pos] for pos in kept),
        frame_indices=tuple(record.frame_indices[pos] for pos in kept),
        objects={tid: name for tid, name in record.objects.items() if tid in used},
    )


def balance_strata(
    records: Sequence[AnnotationRecord], seed: int
) -> list[AnnotationRecord]:
    """downsample each object-count stratum to the median stratum size

    Kept records stay in their input order."""
    strata: dict[int, list[int]] = defaultdict(list)
    for position, record in enumerate(records):
        strata[record.object_count].append(position)
    if not strata:
        return []
    target = int(np.median([len(members) for members in strata.values()]))
    rng = np.random.default_rng(seed)
    kept: list[int] = []
    for key in sorted(strata):
        members = strata[key]
        if len(members) > target:
            members = sorted(rng.choice(members, size=target, replace=False).tolist())
        kept += members
    return [records[position] for position in sorted(kept)]


def refine(
    records: Sequence[AnnotationRecord],
    max_instances: int,
    *,
    balance: bool = False,
    seed: int = 0,
) -> tuple[list[AnnotationRecord], DatasetStats]:
    """refined records and their statistics

    1. frames without any object are removed (records left empty are dropped)
    2. records with a frame holding more than max_instances objects are dropped
    3. with balance, object-count strata are downsampled to the median size"""
    refined = [drop_empty_frames(record) for record in records]
    removed_frames = sum(r.num_frames for r in records) - sum(
        r.num_frames for r in refined
    )
    refined = [record for record in refined if record.num_frames]
    over = [record for record in refined if record.max_instance > max_instances]
    refined = [record for record in refined if record.max_instance <= max_instances]
    logger.debug(
        f"removed {removed_frames} empty frame(s), "
        f"{len(over)} record(s) over {max_instances} instances"
    )
    if balance:
        refined = balance_strata(refined, seed)
    if not refined:
        logger.warning("refinement left no record")
    return refined, DatasetStats.from_records(refined)
