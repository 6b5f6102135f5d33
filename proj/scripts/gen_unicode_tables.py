#!/usr/bin/env python3
"""Regenerates src/unicode_tables.inc from the Unicode Character Database.

Block ranges come from Blocks.txt (default: the copy shipped with perl under
/usr/share/perl/*/unicore). Letter ranges (general category L*) come from
Python's unicodedata module. Both sources must carry the same Unicode
version; the version is embedded in the generated file.

Usage: gen_unicode_tables.py [path/to/Blocks.txt] [output.inc]
"""

import glob
import sys
import unicodedata


def find_blocks_txt():
    for pat in ("/usr/share/perl/*/unicore/Blocks.txt",
                "/usr/share/unicode/Blocks.txt"):
        hits = sorted(glob.glob(pat))
        if hits:
            return hits[0]
    sys.exit("Blocks.txt not found; pass its path explicitly")


def parse_blocks(path):
    version = None
    blocks = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line.startswith("# Blocks-"):
                version = line.split("-")[1].rsplit(".txt", 1)[0]
            if not line or line.startswith("#"):
                continue
            span, name = line.split(";")
            lo, hi = span.split("..")
            blocks.append((int(lo, 16), int(hi, 16), name.strip()))
    blocks.sort()
    return version, blocks


def letter_ranges():
    ranges = []
    start = None
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            is_letter = False
        else:
            is_letter = unicodedata.category(chr(cp)).startswith("L")
        if is_letter and start is None:
            start = cp
        elif not is_letter and start is not None:
            ranges.append((start, cp - 1))
            start = None
    if start is not None:
        ranges.append((start, 0x10FFFF))
    return ranges


def main():
    blocks_path = sys.argv[1] if len(sys.argv) > 1 else find_blocks_txt()
    out_path = sys.argv[2] if len(sys.argv) > 2 else "src/unicode_tables.inc"

    version, blocks = parse_blocks(blocks_path)
    if version != unicodedata.unidata_version:
        sys.exit(f"version mismatch: Blocks.txt {version} vs "
                 f"unicodedata {unicodedata.unidata_version}")
    letters = letter_ranges()

    with open(out_path, "w", encoding="utf-8") as out:
        out.write("// Generated by scripts/gen_unicode_tables.py — do not edit by hand.\n")
        out.write(f"// Source: Unicode Character Database {version} "
                  "(Blocks.txt + general categories L*).\n\n")
        out.write(f'inline constexpr const char* kUnicodeVersion = "{version}";\n\n')

        out.write("struct BlockRange { char32_t lo; char32_t hi; const char* name; };\n\n")
        out.write(f"inline constexpr BlockRange kBlocks[{len(blocks)}] = {{\n")
        for lo, hi, name in blocks:
            out.write(f'    {{0x{lo:04X}, 0x{hi:04X}, "{name}"}},\n')
        out.write("};\n\n")

        out.write("struct CodepointRange { char32_t lo; char32_t hi; };\n\n")
        out.write(f"inline constexpr CodepointRange kLetterRanges[{len(letters)}] = {{\n")
        for lo, hi in letters:
            out.write(f"    {{0x{lo:04X}, 0x{hi:04X}}},\n")
        out.write("};\n")

    print(f"wrote {out_path}: {len(blocks)} blocks, {len(letters)} letter ranges, "
          f"Unicode {version}")


if __name__ == "__main__":
    main()
