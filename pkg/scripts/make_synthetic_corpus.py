"""Generate the bundled synthetic handwriting corpus.

Writes per-class text-line images plus a manifest.csv, and optionally a
set of multi-line page scans (ruled or plain) for preprocessing work.
"""

import argparse
from pathlib import Path

from coldscript import image_io, synthetic


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--out", default="corpus", help="output directory")
    parser.add_argument("--per-class", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--pages", type=int, default=0,
                        help="also write this many 3-line page scans")
    parser.add_argument("--ruled", action="store_true",
                        help="draw printed rule lines under the page text")
    args = parser.parse_args()

    manifest = synthetic.make_corpus(
        args.out, per_class=args.per_class, seed=args.seed
    )
    print(f"{len(synthetic.STYLES) * args.per_class} line images -> {manifest}")

    if args.pages:
        page_dir = Path(args.out) / "pages"
        page_dir.mkdir(parents=True, exist_ok=True)
        rows = ["path,label,writer"]
        for n in range(args.pages):
            styles = [synthetic.STYLES[(n + k) % len(synthetic.STYLES)] for k in range(3)]
            sample = synthetic.make_page(styles, seed=args.seed + n, ruled=args.ruled)
            name = f"page_{n:03d}.png"
            image_io.write_png(sample.image, page_dir / name)
            rows.append(f"{name},{'+'.join(styles)},w{n:02d}")
        image_io.atomic_write_text("\n".join(rows) + "\n", page_dir / "manifest.csv")
        print(f"{args.pages} pages -> {page_dir}")


if __name__ == "__main__":
    main()
