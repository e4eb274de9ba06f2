#!/usr/bin/env python3
"""Regenerates crates/core/data/poses.txt from joint-angle descriptions.

Canonical stature is 1.60 m. All poses share bone lengths, so the stature
chain (heel-ankle-knee-hip, pelvis-neck-head-head_top) is pose invariant.
"""
import math
import sys

HEEL_ANKLE = 0.08
SHIN = 0.40
THIGH = 0.40
SPINE = 0.48
NECK_HEAD = 0.13
HEAD_TOP = 0.11
HIP_HALF = 0.09
SHOULDER_HALF = 0.18
SHOULDER_DROP = 0.05
UPPER_ARM = 0.28
FOREARM = 0.25
HAND = 0.09

HEAD, BODY, UARM, LARM, HANDC, LEGS = range(6)


def d(az, el):
    az, el = math.radians(az), math.radians(el)
    return (math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el))


def add(a, b, s=1.0):
    return tuple(x + s * y for x, y in zip(a, b))


def lerp(a, b, t):
    return tuple(x + t * (y - x) for x, y in zip(a, b))


def rot_torso(v, pitch, roll):
    # pitch bends forward (+x) about y, roll tilts toward -y about x
    p, r = math.radians(pitch), math.radians(roll)
    x, y, z = v
    # roll about x
    y, z = y * math.cos(r) - z * math.sin(r), y * math.sin(r) + z * math.cos(r)
    # pitch about y (positive leans the top forward)
    x, z = x * math.cos(p) + z * math.sin(p), -x * math.sin(p) + z * math.cos(p)
    return (x, y, z)


def build(name, pitch=0, roll=0, larm=((90, -72), (60, -78)), rarm=((-90, -72), (-60, -78)),
          lleg=((0, -90), (0, -90)), rleg=((0, -90), (0, -90))):
    # legs relative to pelvis at origin
    legs = {}
    for side, sgn, leg in (("l", 1, lleg), ("r", -1, rleg)):
        hip = (0.0, sgn * HIP_HALF, 0.0)
        knee = add(hip, d(*leg[0]), THIGH)
        ankle = add(knee, d(*leg[1]), SHIN)
        heel = add(ankle, (0, 0, -1), HEEL_ANKLE)
        legs[side] = (hip, knee, ankle, heel)
    lift = -min(legs["l"][3][2], legs["r"][3][2])
    pelvis = (0.0, 0.0, lift)
    j = {"pelvis": pelvis}
    for side in ("l", "r"):
        hip, knee, ankle, heel = (add(p, pelvis) for p in legs[side])
        j[side + "_hip"], j[side + "_knee"], j[side + "_ankle"], j[side + "_heel"] = hip, knee, ankle, heel
    up = rot_torso((0, 0, 1), pitch, roll)
    neck = add(pelvis, up, SPINE)
    j["neck"] = neck
    j["head"] = add(neck, up, NECK_HEAD)
    j["head_top"] = add(j["head"], up, HEAD_TOP)
    for side, sgn, arm in (("l", 1, larm), ("r", -1, rarm)):
        sh = add(neck, rot_torso((0, sgn * SHOULDER_HALF, -SHOULDER_DROP), pitch, roll))
        el = add(sh, d(*arm[0]), UPPER_ARM)
        wr = add(el, d(*arm[1]), FOREARM)
        tip = add(wr, d(*arm[1]), HAND)
        j[side + "_shoulder"], j[side + "_elbow"], j[side + "_wrist"], j[side + "_hand_tip"] = sh, el, wr, tip

    s = []
    s.append((HEAD, j["head"], 0.11))
    s.append((HEAD, add(j["head"], rot_torso((0.04, 0, -0.03), pitch, roll)), 0.08))
    s.append((HEAD, add(j["head"], rot_torso((-0.03, 0, 0.02), pitch, roll)), 0.08))
    s.append((BODY, neck, 0.07))
    for t in (0.1, 0.35, 0.6, 0.85):
        c = lerp(pelvis, neck, t)
        for sgn in (1, -1):
            s.append((BODY, add(c, rot_torso((0, sgn * 0.08, 0), pitch, roll)), 0.10))
    for side in ("l", "r"):
        s.append((BODY, j[side + "_shoulder"], 0.06))
    for side in ("l", "r"):
        for t in (0.125, 0.375, 0.625, 0.875):
            s.append((UARM, lerp(j[side + "_shoulder"], j[side + "_elbow"], t), 0.055))
        for t in (1 / 6, 0.5, 5 / 6):
            s.append((LARM, lerp(j[side + "_elbow"], j[side + "_wrist"], t), 0.045))
        for t in (0.25, 0.75):
            s.append((HANDC, lerp(j[side + "_wrist"], j[side + "_hand_tip"], t), 0.045))
    for side in ("l", "r"):
        for t in (0.125, 0.375, 0.625, 0.875):
            s.append((LEGS, lerp(j[side + "_hip"], j[side + "_knee"], t), 0.075))
        for t in (1 / 6, 0.5, 5 / 6):
            s.append((LEGS, lerp(j[side + "_knee"], j[side + "_ankle"], t), 0.055))
        a = j[side + "_ankle"]
        s.append((LEGS, (a[0] + 0.06, a[1], max(a[2] - HEEL_ANKLE + 0.045, 0.045)), 0.045))
    assert len(s) == 48, len(s)
    return name, j, s


POSES = [
    build("standing"),
    build("sitting", pitch=5, larm=((20, -70), (0, -10)), rarm=((-20, -70), (0, -10)),
          lleg=((0, 0), (0, -90)), rleg=((0, 0), (0, -90))),
    build("stretching", larm=((90, 0), (90, 0)), rarm=((-90, 0), (-90, 0))),
    build("walking", larm=((160, -70), (160, -75)), rarm=((20, -70), (10, -60)),
          lleg=((0, -65), (180, -80)), rleg=((180, -75), (180, -85))),
    build("working", pitch=15, larm=((15, -45), (0, -10)), rarm=((-15, -45), (0, -10))),
    build("dancing", roll=-8, larm=((60, 40), (40, 70)), rarm=((-90, -10), (-60, 10)),
          lleg=((30, -45), (20, -100)), rleg=((0, -90), (0, -90))),
    build("bending", pitch=70, larm=((10, -90), (0, -80)), rarm=((-10, -90), (0, -80))),
    build("bowing", pitch=35, larm=((60, -85), (40, -85)), rarm=((-60, -85), (-40, -85))),
    build("swinging", larm=((45, -30), (30, -20)), rarm=((30, -40), (25, -25))),
    build("boxing", larm=((30, -40), (0, 15)), rarm=((-30, -40), (0, 10)),
          lleg=((10, -85), (0, -90)), rleg=((190, -85), (180, -90))),
    build("tilting", roll=20, larm=((90, -70), (90, -80)), rarm=((-90, -70), (-90, -80))),
    build("single_arm_raised", rarm=((-20, 80), (-10, 85))),
    build("both_arms_raised", larm=((20, 80), (10, 85)), rarm=((-20, 80), (-10, 85))),
]


def main(out):
    with open(out, "w") as f:
        f.write("# canonical skeletons, stature 1.60 m, meters, x forward y left z up\n")
        for name, joints, spheres in POSES:
            f.write(f"pose {name}\n")
            for jn, p in joints.items():
                f.write(f"joint {jn} {p[0]:.4f} {p[1]:.4f} {p[2]:.4f}\n")
            for part, c, r in spheres:
                f.write(f"sphere {part} {c[0]:.4f} {c[1]:.4f} {c[2]:.4f} {r:.4f}\n")
            f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/data/poses.txt")
