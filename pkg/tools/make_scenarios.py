"""Regenerate the bundled scenario files (mannequin schedules on an arc)."""
import json
import math
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "hareplan" / "data" / "scenarios"
RADIUS = 1.85
EXTENDED = [-1.2, 1.5, -1.9, -1.57, 0.0]
TABLE = {"type": "box", "min": [-1.5, -1.5, -0.9], "max": [0.6, 1.5, -0.1]}


def spot(theta, radius=RADIUS):
    """Floor position facing the robot when its base angle is ``theta``."""
    return [round(-radius * math.cos(theta), 4), round(-radius * math.sin(theta), 4)]


def schedule(keys, radius=RADIUS):
    """keys: (t, theta, reach); arcs are subdivided so the walk stays on the circle."""
    rows = []
    for (t0, a0, r0), (t1, a1, r1) in zip(keys[:-1], keys[1:]):
        n = max(1, int(math.ceil(abs(a1 - a0) / 0.2)))
        for k in range(n):
            f = k / n
            rows.append([round(t0 + f * (t1 - t0), 4), *spot(a0 + f * (a1 - a0), radius),
                         round(r0 + f * (r1 - r0), 4)])
    t, a, r = keys[-1]
    rows.append([t, *spot(a, radius), r])
    return rows


def scenario(name, keys, presence, note, radius=RADIUS, **extra):
    data = {
        "name": name,
        "description": note,
        "robot": "ur10e_like",
        "q_start": [-2.1] + EXTENDED,
        "q_goal": [2.1] + EXTENDED,
        "scene": {"obstacles": [TABLE], "human_clearance": 0.1},
        "human": {"mannequin": schedule(keys, radius) if keys else [], "presence": presence,
                  "noise_amplitude": 0.03},
        "ssm": {"C": 0.25, "T_r": 0.15, "v_h": 1.6, "a_s": 2.5},
        "plan": {"budget": 2.0, "seed": 7,
                 "path_set": {"count": 3, "budget": 1.0, "seed": 100, "human_time": 5.0}},
        "timing_jitter": 0.5,
        "timeout_factor": 6.0,
    }
    data.update(extra)
    return data


def work(theta, t0, t1, arrive=True):
    """Reach in and out at one spot between ``t0`` and ``t1``."""
    keys = [(t0, theta, 0.0 if arrive else 1.0), (t0 + 0.6, theta, 1.0)]
    t = t0 + 0.6
    while t + 2.0 < t1 - 0.4:
        t += 2.0
        keys.append((t, theta, 0.8 if len(keys) % 2 == 0 else 1.0))
    keys += [(t1 - 0.4, theta, 1.0), (t1, theta, 0.0)]
    return keys


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    spot_theta = -1.0
    specs = [
        scenario("short", work(spot_theta, 2.0, 7.0), [2.0, 7.0],
                 "human works in the shared region for 5 s"),
        scenario("medium", work(spot_theta, 2.0, 12.0), [2.0, 12.0],
                 "human works in the shared region for 10 s"),
        scenario("long", work(spot_theta, 2.0, 10.0), [2.0, 10.0],
                 "human works in the shared region for 8 s of the motion"),
        scenario("proactive", work(spot_theta, 0.0, 20.0, arrive=False), [0.0, 20.0],
                 "human is already in the shared region and stays for 20 s"),
        scenario("sweep", work(spot_theta, 2.0, 7.0), [2.0, 7.0],
                 "human stands close enough to block the direct motion for 5 s", radius=1.0),
        scenario("empty", [], [0.0, 0.0], "no human"),
    ]
    for data in specs:
        (OUT / f"{data['name']}.json").write_text(json.dumps(data, indent=1) + "\n")


if __name__ == "__main__":
    main()
