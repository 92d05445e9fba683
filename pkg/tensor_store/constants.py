MAGIC = b"GFXT"
VERSION = 1

# magic(4) version(1) flags(1) reserved(2) header_len(4) header_crc32(4)
FIXED_HEADER_FORMAT = "<4sBBHII"
FIXED_HEADER_SIZE = 16

# dtype code -> numpy little-endian dtype string
DTYPES = {
    "f32": "<f4",
    "f64": "<f8",
}
