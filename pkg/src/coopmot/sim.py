"""Synthetic two-agent scenarios: ground truth plus noisy detections.

Objects are car-like boxes moving at constant velocity in a square world
centered on the origin. Both agents observe from the origin: an agent
misses an object when its bearing falls in one of that agent's occlusion
sectors, or with the agent's dropout probability. Observed centroids get
independent Gaussian noise. Everything is deterministic per seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Detection, FrameBundle, validate_detection, wrap_angle

CAR_L, CAR_W, CAR_H = 4.5, 1.8, 1.6
MIN_SPAWN_SEPARATION = 8.0  # centers; keeps >= 2 m box clearance

AGENTS = ("agent0", "agent1")


@dataclass(frozen=True)
class ScenarioConfig:
    num_objects: int = 5
    num_frames: int = 50
    speed_min: float = 0.1   # meters per frame
    speed_max: float = 0.5
    world_extent: float = 60.0
    sigma: tuple = (0.3, 0.3)
    dropout: tuple = (0.0, 0.0)
    # per agent, list of (lo, hi) bearing ranges in radians; lo > hi wraps
    occlusion_sectors: tuple = ((), ())
    score_base: float = 0.8
    score_jitter: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.num_frames < 1:
            raise ValueError("num_frames must be >= 1")
        if self.num_objects < 0:
            raise ValueError("num_objects must be >= 0")
        if any(s < 0 for s in self.sigma):
            raise ValueError("sigma must be >= 0")
        if any(not 0.0 <= p <= 1.0 for p in self.dropout):
            raise ValueError("dropout must lie in [0, 1]")
        if self.speed_min < 0 or self.speed_max < self.speed_min:
            raise ValueError("need 0 <= speed_min <= speed_max")

    def to_dict(self) -> dict:
        return {
            "num_objects": self.num_objects,
            "num_frames": self.num_frames,
            "speed_min": self.speed_min,
            "speed_max": self.speed_max,
            "world_extent": self.world_extent,
            "sigma": list(self.sigma),
            "dropout": list(self.dropout),
            "occlusion_sectors": [[list(s) for s in sect]
                                  for sect in self.occlusion_sectors],
            "score_base": self.score_base,
            "score_jitter": self.score_jitter,
            "seed": self.seed,
        }


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    known = set(ScenarioConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    kwargs = dict(raw)
    for key in ("sigma", "dropout"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    if "occlusion_sectors" in kwargs:
        kwargs["occlusion_sectors"] = tuple(
            tuple(tuple(s) for s in sect) for sect in kwargs["occlusion_sectors"])
    return ScenarioConfig(**kwargs)


def _in_sector(angle: float, sector) -> bool:
    lo, hi = sector
    lo, hi = wrap_angle(lo), wrap_angle(hi)
    if lo <= hi:
        return lo <= angle < hi
    return angle >= lo or angle < hi


def _occluded(x: float, y: float, sectors) -> bool:
    bearing = math.atan2(y, x)
    return any(_in_sector(bearing, s) for s in sectors)


@dataclass
class _ObjectTrack:
    pos0: np.ndarray
    vel: np.ndarray
    theta: float


def _spawn_objects(cfg: ScenarioConfig, rng) -> list:
    half = cfg.world_extent / 2.0
    objects = []
    attempts = 0
    while len(objects) < cfg.num_objects:
        attempts += 1
        if attempts > 10000:
            raise ValueError("world too small for the requested object count")
        pos = rng.uniform(-half, half, size=2)
        if any(np.hypot(*(pos - o.pos0[:2])) < MIN_SPAWN_SEPARATION for o in objects):
            continue
        speed = rng.uniform(cfg.speed_min, cfg.speed_max)
        heading = rng.uniform(-math.pi, math.pi)
        vel = np.array([speed * math.cos(heading), speed * math.sin(heading), 0.0])
        objects.append(_ObjectTrack(
            pos0=np.array([pos[0], pos[1], CAR_H / 2.0]),
            vel=vel, theta=wrap_angle(heading)))
    return objects


def generate(cfg: ScenarioConfig):
    """Build (gt_frames, bundles) for the configured scenario.

    gt_frames[t] is a list of (object_id, Detection); bundles[t] is the
    FrameBundle of both agents' noisy detections.
    """
    rng = np.random.default_rng(cfg.seed)
    objects = _spawn_objects(cfg, rng)

    gt_frames = []
    bundles = []
    for t in range(cfg.num_frames):
        gt_row = []
        positions = []
        for oid, obj in enumerate(objects):
            pos = obj.pos0 + t * obj.vel
            positions.append(pos)
            gt_row.append((oid, Detection(
                x=pos[0], y=pos[1], z=pos[2], theta=obj.theta,
                h=CAR_H, w=CAR_W, l=CAR_L, score=1.0,
                agent_id="gt", frame=t, local_index=oid)))
        gt_frames.append(gt_row)

        per_agent = {}
        for a, agent in enumerate(AGENTS):
            dets = []
            for oid, obj in enumerate(objects):
                # fixed draw order keeps the stream reproducible
                drop_u = rng.uniform()
                noise = rng.normal(0.0, 1.0, size=3)
                jitter = rng.normal(0.0, 1.0)
                pos = positions[oid]
                if _occluded(pos[0], pos[1], cfg.occlusion_sectors[a]):
                    continue
                if drop_u < cfg.dropout[a]:
                    continue
                noisy = pos + cfg.sigma[a] * noise
                score = min(1.0, max(0.0, cfg.score_base + cfg.score_jitter * jitter))
                dets.append(validate_detection(Detection(
                    x=noisy[0], y=noisy[1], z=noisy[2], theta=obj.theta,
                    h=CAR_H, w=CAR_W, l=CAR_L, score=score,
                    agent_id=agent, frame=t, local_index=len(dets))))
            per_agent[agent] = dets
        bundles.append(FrameBundle(frame=t, detections_by_agent=per_agent))
    return gt_frames, bundles


def noise_stats(gt_frames, bundles) -> dict:
    """Per-agent centroid RMSE of detections against nearest ground truth."""
    sq = {}
    count = {}
    for gt_row, bundle in zip(gt_frames, bundles):
        if not gt_row:
            continue
        gt_pos = np.array([[d.x, d.y, d.z] for _, d in gt_row])
        for agent, dets in bundle.detections_by_agent.items():
            for d in dets:
                p = np.array([d.x, d.y, d.z])
                nearest = gt_pos[np.argmin(np.linalg.norm(gt_pos - p, axis=1))]
                err = p - nearest
                sq.setdefault(agent, np.zeros(3))
                sq[agent] += err ** 2
                count[agent] = count.get(agent, 0) + 1
    stats = {}
    for agent, acc in sq.items():
        n = count[agent]
        per_axis = np.sqrt(acc / n)
        stats[agent] = {
            "rmse_x": float(per_axis[0]),
            "rmse_y": float(per_axis[1]),
            "rmse_z": float(per_axis[2]),
            "rmse": float(np.sqrt(acc.sum() / (3 * n))),
            "count": n,
        }
    return stats
