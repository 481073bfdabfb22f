#!/usr/bin/env python3
"""Convert a EuRoC MAV sequence (ASL folder layout) into a replay bundle.

EuRoC has no landmark observations, so landmark frames are synthesized
from the ground-truth pose for a user-supplied landmark list.

    python3 euroc_to_bundle.py MH_01_easy/mav0 landmarks_world.csv out/bundle \
        --rate 20 --noise-std 0.05 --seed 1

landmarks_world.csv uses the bundle layout (id,px,py,pz,weight) in the
EuRoC world frame.
"""

import argparse
import pathlib

import numpy as np
import pandas as pd
from scipy.spatial.transform import Rotation, Slerp

FMT = "%.17g"


def read_asl(path):
    df = pd.read_csv(path)
    df.columns = [c.strip().lstrip("#").split(" ")[0] for c in df.columns]
    return df


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("mav0", type=pathlib.Path)
    ap.add_argument("landmarks", type=pathlib.Path)
    ap.add_argument("out", type=pathlib.Path)
    ap.add_argument("--rate", type=float, default=20.0, help="landmark frame rate [Hz]")
    ap.add_argument("--noise-std", type=float, default=0.0, help="body-frame landmark noise [m]")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    imu = read_asl(args.mav0 / "imu0" / "data.csv")
    gt = read_asl(args.mav0 / "state_groundtruth_estimate0" / "data.csv")
    lm = pd.read_csv(args.landmarks)

    # keep IMU samples inside the ground-truth span; times in seconds from the first one
    t_gt = gt["timestamp"].to_numpy(np.int64)
    imu = imu[(imu["timestamp"] >= t_gt[0]) & (imu["timestamp"] <= t_gt[-1])].reset_index(drop=True)
    t0 = imu["timestamp"].iloc[0]
    t_imu = imu["timestamp"].to_numpy(np.int64)
    sec = lambda ns: (ns - t0) * 1e-9

    # ground truth resampled on the IMU clock
    quat_xyzw = gt[["q_RS_x", "q_RS_y", "q_RS_z", "q_RS_w"]].to_numpy()
    rot = Slerp(sec(t_gt), Rotation.from_quat(quat_xyzw))(sec(t_imu))
    interp = lambda cols: np.column_stack([np.interp(sec(t_imu), sec(t_gt), gt[c]) for c in cols])
    p = interp(["p_RS_R_x", "p_RS_R_y", "p_RS_R_z"])
    v = interp(["v_RS_R_x", "v_RS_R_y", "v_RS_R_z"])
    bw = interp(["b_w_RS_S_x", "b_w_RS_S_y", "b_w_RS_S_z"])
    ba = interp(["b_a_RS_S_x", "b_a_RS_S_y", "b_a_RS_S_z"])
    q = rot.as_quat()[:, [3, 0, 1, 2]]
    q[q[:, 0] < 0] *= -1.0

    args.out.mkdir(parents=True, exist_ok=True)
    t = sec(t_imu)
    pd.DataFrame(
        np.column_stack([t, imu[["w_RS_S_x", "w_RS_S_y", "w_RS_S_z", "a_RS_S_x", "a_RS_S_y", "a_RS_S_z"]].to_numpy()]),
        columns=["t", "wx", "wy", "wz", "ax", "ay", "az"],
    ).to_csv(args.out / "imu.csv", index=False, float_format=FMT)
    pd.DataFrame(
        np.column_stack([t, q, p, v, bw, ba]),
        columns=["t", "qw", "qx", "qy", "qz", "px", "py", "pz", "vx", "vy", "vz",
                 "bwx", "bwy", "bwz", "bax", "bay", "baz"],
    ).to_csv(args.out / "truth.csv", index=False, float_format=FMT)
    lm.to_csv(args.out / "landmarks_world.csv", index=False, float_format=FMT)

    # one frame on the IMU sample closest to each multiple of 1/rate
    rng = np.random.default_rng(args.seed)
    picks = np.unique(np.searchsorted(t, np.arange(0.0, t[-1], 1.0 / args.rate)))
    pts = lm[["px", "py", "pz"]].to_numpy()
    rows = []
    for k in picks:
        ys = rot[k].inv().apply(pts - p[k]) + rng.normal(0.0, args.noise_std, pts.shape)
        rows += [(t[k], i, *y) for i, y in zip(lm["id"], ys)]
    obs = pd.DataFrame(rows, columns=["t", "id", "yx", "yy", "yz"])
    obs.to_csv(args.out / "landmark_obs.csv", index=False, float_format=FMT)
    print(f"{len(t)} IMU samples, {len(picks)} landmark frames over {t[-1]:.1f} s -> {args.out}")


if __name__ == "__main__":
    main()
