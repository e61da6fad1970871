#pragma once

#include <string>

#include "znet/volume.hpp"

namespace znet {

// MetaImage (.mhd header + raw payload) I/O.
//
// The reader accepts NDims = 3, ElementType in {MET_SHORT, MET_USHORT,
// MET_UCHAR, MET_FLOAT} and honors BinaryDataByteOrderMSB /
// ElementByteOrderMSB; DimSize and ElementSpacing are given in (x, y, z)
// order and stored internally as (d, h, w) / (sz, sy, sx). Loading a mask
// additionally requires a strictly binary payload.
Volume load_mhd(const std::string& header_path,
                VolumeKind kind = VolumeKind::intensity);

// Writes `header_path` plus a little-endian raw payload next to it
// (same stem, ".raw"). Masks are written as MET_UCHAR, intensities as
// MET_FLOAT.
void save_mhd(const std::string& header_path, const Volume& v);

}  // namespace znet
