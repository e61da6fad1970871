#include "znet/metaimage.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "znet/keyvalue.hpp"

namespace znet {

namespace {

namespace fs = std::filesystem;

std::size_t element_size(const std::string& type) {
  if (type == "MET_UCHAR") return 1;
  if (type == "MET_SHORT" || type == "MET_USHORT") return 2;
  if (type == "MET_FLOAT") return 4;
  throw ParseError("unsupported ElementType '" + type + "'");
}

std::vector<unsigned char> read_payload(const fs::path& path, std::size_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open raw payload " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() != expected) {
    throw ParseError("payload " + path.string() + " has " +
                     std::to_string(bytes.size()) + " bytes, header implies " +
                     std::to_string(expected));
  }
  return bytes;
}

float decode_element(const unsigned char* p, const std::string& type, bool msb) {
  if (type == "MET_UCHAR") return static_cast<float>(p[0]);
  if (type == "MET_SHORT" || type == "MET_USHORT") {
    const std::uint16_t u = msb
                                ? static_cast<std::uint16_t>((p[0] << 8) | p[1])
                                : static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    if (type == "MET_SHORT") return static_cast<float>(static_cast<std::int16_t>(u));
    return static_cast<float>(u);
  }
  // MET_FLOAT
  std::uint32_t u;
  if (msb) {
    u = (static_cast<std::uint32_t>(p[0]) << 24) |
        (static_cast<std::uint32_t>(p[1]) << 16) |
        (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
  } else {
    u = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
        (static_cast<std::uint32_t>(p[2]) << 16) |
        (static_cast<std::uint32_t>(p[3]) << 24);
  }
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

}  // namespace

Volume load_mhd(const std::string& header_path, VolumeKind kind) {
  const KeyValueFile kv = KeyValueFile::parse_file(header_path);

  const long ndims = kv.as_int_or("NDims", -1);
  if (ndims != 3) {
    throw ParseError(header_path + ": NDims must be 3, got " + std::to_string(ndims));
  }
  if (kv.as_bool_or("CompressedData", false)) {
    throw ParseError(header_path + ": CompressedData is not supported");
  }
  if (!kv.has("DimSize")) throw ParseError(header_path + ": missing DimSize");
  const auto dims = kv.as_double_list("DimSize");
  if (dims.size() != 3) throw ParseError(header_path + ": DimSize needs 3 values");
  const int w = static_cast<int>(dims[0]);
  const int h = static_cast<int>(dims[1]);
  const int d = static_cast<int>(dims[2]);
  if (w < 1 || h < 1 || d < 1) throw ParseError(header_path + ": bad DimSize");

  std::array<double, 3> spacing = {1.0, 1.0, 1.0};  // (sz, sy, sx)
  const std::string spacing_key =
      kv.has("ElementSpacing") ? "ElementSpacing" : kv.has("ElementSize") ? "ElementSize" : "";
  if (!spacing_key.empty()) {
    const auto sp = kv.as_double_list(spacing_key);
    if (sp.size() != 3) {
      throw ParseError(header_path + ": " + spacing_key + " needs 3 values");
    }
    spacing = {sp[2], sp[1], sp[0]};
    for (double s : spacing) {
      if (!(s > 0.0)) throw ParseError(header_path + ": non-positive spacing");
    }
  }

  const std::string type = kv.get_or("ElementType", "MET_FLOAT");
  const std::size_t esize = element_size(type);
  const bool msb = kv.as_bool_or("BinaryDataByteOrderMSB",
                                 kv.as_bool_or("ElementByteOrderMSB", false));

  if (!kv.has("ElementDataFile")) {
    throw ParseError(header_path + ": missing ElementDataFile");
  }
  const std::string data_file = kv.get("ElementDataFile");
  if (data_file == "LOCAL" || data_file == "LIST") {
    throw ParseError(header_path + ": ElementDataFile " + data_file +
                     " is not supported (external raw file expected)");
  }
  const fs::path payload_path = fs::path(header_path).parent_path() / data_file;

  const std::size_t count = static_cast<std::size_t>(d) * h * w;
  const std::vector<unsigned char> bytes = read_payload(payload_path, count * esize);

  Volume v(d, h, w, spacing, kind);
  for (std::size_t i = 0; i < count; ++i) {
    v.data[i] = decode_element(bytes.data() + i * esize, type, msb);
  }
  if (kind == VolumeKind::mask && !v.is_binary()) {
    throw ParseError(header_path + ": mask payload contains values outside {0,1}");
  }
  return v;
}

void save_mhd(const std::string& header_path, const Volume& v) {
  const fs::path hp(header_path);
  fs::path raw = hp;
  raw.replace_extension(".raw");

  const bool mask = v.kind == VolumeKind::mask;
  if (mask && !v.is_binary()) {
    throw ContractError("save_mhd: mask volume is not binary");
  }

  KeyValueFile kv;
  kv.set("ObjectType", "Image");
  kv.set("NDims", "3");
  kv.set("BinaryData", "True");
  kv.set("BinaryDataByteOrderMSB", "False");
  {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d %d %d", v.w, v.h, v.d);
    kv.set("DimSize", buf);
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", v.spacing[2], v.spacing[1],
                  v.spacing[0]);
    kv.set("ElementSpacing", buf);
  }
  kv.set("ElementType", mask ? "MET_UCHAR" : "MET_FLOAT");
  kv.set("ElementDataFile", raw.filename().string());
  kv.write_file(header_path);

  std::ofstream out(raw, std::ios::binary);
  if (!out) throw IoError("cannot open " + raw.string() + " for writing");
  if (mask) {
    std::vector<unsigned char> bytes(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      bytes[i] = v.data[i] == 1.0f ? 1 : 0;
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  } else {
    std::vector<unsigned char> bytes(v.size() * 4);
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::uint32_t u;
      std::memcpy(&u, &v.data[i], 4);
      bytes[4 * i] = static_cast<unsigned char>(u & 0xff);
      bytes[4 * i + 1] = static_cast<unsigned char>((u >> 8) & 0xff);
      bytes[4 * i + 2] = static_cast<unsigned char>((u >> 16) & 0xff);
      bytes[4 * i + 3] = static_cast<unsigned char>((u >> 24) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw IoError("write to " + raw.string() + " failed");
}

}  // namespace znet
