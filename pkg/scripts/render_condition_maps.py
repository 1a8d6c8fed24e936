#!/usr/bin/env python3
"""Visualize the condition tensor for an image plus trajectory file.

Writes one grayscale PNG of the aggregate weight channel per latent frame
(upscaled to image resolution for easy overlay) and, optionally, the raw
ATIC tensor.  Useful for eyeballing how sigma modes spread the weights.
"""

import argparse
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from ati import evalsim, injector
from ati.core import InjectorConfig, load_trajectory_set


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("image", type=Path)
    parser.add_argument("trajectories", type=Path)
    parser.add_argument("--out-dir", type=Path, default=Path("condition_maps"))
    parser.add_argument("--stride", type=int, default=8)
    parser.add_argument("--temporal-stride", type=int, default=1)
    parser.add_argument(
        "--sigma-mode", default="grid_derived",
        choices=["grid_derived", "paper_normalized", "explicit"],
    )
    parser.add_argument("--sigma", type=float, default=1.0)
    parser.add_argument("--channels", type=int, default=8)
    parser.add_argument("--atic", type=Path, default=None,
                        help="also write the raw tensor here")
    args = parser.parse_args()

    img = evalsim.load_image(args.image)
    tset = load_trajectory_set(args.trajectories)
    config = InjectorConfig(
        sigma_mode=args.sigma_mode,
        sigma=args.sigma,
        spatial_stride=args.stride,
        temporal_stride=args.temporal_stride,
    )
    grid = evalsim.pseudo_encode(img, stride=args.stride, channels=args.channels)
    cond = injector.compose_condition(tset, grid, config)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for tau in range(cond.latent_frames):
        weight = cond.weight_channel[tau]
        data = np.round(weight * 255.0).astype(np.uint8)
        upscaled = np.kron(data, np.ones((args.stride, args.stride), np.uint8))
        PILImage.fromarray(upscaled, mode="L").save(
            args.out_dir / f"weight_{tau:05d}.png"
        )
    print(
        f"wrote {cond.latent_frames} weight maps "
        f"({cond.height}x{cond.width} latent cells) to {args.out_dir}"
    )
    if args.atic is not None:
        injector.write_condition(cond, args.atic)
        print(f"wrote tensor to {args.atic}")


if __name__ == "__main__":
    main()
