#include "themis/embedding_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>

#include "themis/error.hpp"

namespace themis::embed {

namespace {

template <typename T>
void put_le(std::uint8_t* out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out[i] = static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i));
  }
}

template <typename T>
T get_le(const std::uint8_t* in) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return static_cast<T>(value);
}

constexpr std::uint64_t kMaxFileOffset =
    static_cast<std::uint64_t>(std::numeric_limits<std::streamoff>::max());

}  // namespace

EmbeddingSequence::EmbeddingSequence(std::size_t rows, std::size_t dim, std::vector<float> values,
                                     std::string source_tag)
    : rows_(rows), dim_(dim), values_(std::move(values)), source_tag_(std::move(source_tag)) {
  if (rows_ == 0 || dim_ == 0) throw Error(ErrorCode::InvalidParameter, "embedding shape must be positive");
  if (values_.size() != rows_ * dim_) {
    throw Error(ErrorCode::InvalidParameter, "embedding buffer does not match n*d");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::NonFiniteValue, "embedding row " + std::to_string(i / dim_), i / dim_);
    }
  }
}

std::array<std::uint8_t, kHeaderBytes> encode_header(const EmbeddingFileHeader& header) {
  std::array<std::uint8_t, kHeaderBytes> bytes{};
  std::memcpy(bytes.data(), header.magic.data(), 4);
  put_le(bytes.data() + 4, header.version);
  put_le(bytes.data() + 8, header.rows);
  put_le(bytes.data() + 16, header.dim);
  bytes[20] = header.dtype_code;
  std::memcpy(bytes.data() + 21, header.reserved.data(), 3);
  return bytes;
}

EmbeddingFileHeader decode_header(std::span<const std::uint8_t, kHeaderBytes> bytes) {
  EmbeddingFileHeader header;
  std::memcpy(header.magic.data(), bytes.data(), 4);
  header.version = get_le<std::uint32_t>(bytes.data() + 4);
  header.rows = get_le<std::uint64_t>(bytes.data() + 8);
  header.dim = get_le<std::uint32_t>(bytes.data() + 16);
  header.dtype_code = bytes[20];
  std::memcpy(header.reserved.data(), bytes.data() + 21, 3);
  return header;
}

std::uint64_t payload_bytes(std::uint64_t rows, std::uint64_t dim) {
  std::uint64_t cells = 0;
  std::uint64_t bytes = 0;
  if (__builtin_mul_overflow(rows, dim, &cells) || __builtin_mul_overflow(cells, 4ULL, &bytes) ||
      bytes > kMaxFileOffset - kHeaderBytes) {
    throw Error(ErrorCode::DimensionOverflow,
                "n=" + std::to_string(rows) + " d=" + std::to_string(dim) + " exceeds file size limits");
  }
  return bytes;
}

void write_embeddings(const EmbeddingSequence& seq, const std::filesystem::path& path) {
  if (seq.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::DimensionOverflow, "d does not fit in u32");
  }
  const auto bytes = payload_bytes(seq.rows(), seq.dim());
  if (seq.source_tag().size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::DimensionOverflow, "source tag too long");
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");

  EmbeddingFileHeader header;
  header.rows = seq.rows();
  header.dim = static_cast<std::uint32_t>(seq.dim());
  const auto head = encode_header(header);
  out.write(reinterpret_cast<const char*>(head.data()), head.size());

  const auto values = seq.values();
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(bytes));
  } else {
    std::vector<std::uint8_t> buf(bytes);
    for (std::size_t i = 0; i < values.size(); ++i) {
      put_le(buf.data() + 4 * i, std::bit_cast<std::uint32_t>(values[i]));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }

  std::uint8_t len[4];
  put_le(len, static_cast<std::uint32_t>(seq.source_tag().size()));
  out.write(reinterpret_cast<const char*>(len), 4);
  out.write(seq.source_tag().data(), static_cast<std::streamsize>(seq.source_tag().size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

EmbeddingSequence read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open '" + path.string() + "'");

  std::array<std::uint8_t, kHeaderBytes> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  if (in.gcount() != static_cast<std::streamsize>(head.size())) {
    throw Error(ErrorCode::TruncatedPayload, "file shorter than the 24-byte header");
  }
  const auto header = decode_header(head);
  if (header.magic != kMagic) throw Error(ErrorCode::BadMagic, "'" + path.string() + "' is not a THEM file");
  if (header.version != kFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "version " + std::to_string(header.version));
  }
  if (header.dtype_code != kDtypeFloat32) {
    throw Error(ErrorCode::UnsupportedDtype, "dtype code " + std::to_string(header.dtype_code));
  }
  if (header.rows == 0 || header.dim == 0) throw Error(ErrorCode::InvalidParameter, "empty embedding shape");

  const auto bytes = payload_bytes(header.rows, header.dim);
  const auto file_size = std::filesystem::file_size(path);
  if (file_size < kHeaderBytes + bytes) {
    throw Error(ErrorCode::TruncatedPayload,
                "payload holds " + std::to_string((file_size - kHeaderBytes) / 4 / header.dim) +
                    " of " + std::to_string(header.rows) + " rows");
  }
  const auto cells = static_cast<std::size_t>(bytes / 4);
  std::vector<float> values(cells);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<std::uint64_t>(in.gcount()) != bytes) {
    throw Error(ErrorCode::TruncatedPayload,
                "payload holds " + std::to_string(in.gcount() / 4 / header.dim) + " of " +
                    std::to_string(header.rows) + " rows");
  }
  if constexpr (std::endian::native != std::endian::little) {
    for (auto& v : values) {
      v = std::bit_cast<float>(get_le<std::uint32_t>(reinterpret_cast<const std::uint8_t*>(&v)));
    }
  }

  std::uint8_t len[4];
  in.read(reinterpret_cast<char*>(len), 4);
  if (in.gcount() != 4) throw Error(ErrorCode::TruncatedPayload, "missing source tag trailer");
  std::string tag(get_le<std::uint32_t>(len), '\0');
  in.read(tag.data(), static_cast<std::streamsize>(tag.size()));
  if (static_cast<std::size_t>(in.gcount()) != tag.size()) {
    throw Error(ErrorCode::TruncatedPayload, "source tag trailer cut short");
  }
  return {static_cast<std::size_t>(header.rows), header.dim, std::move(values), std::move(tag)};
}

std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t counter) noexcept {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform_at(std::uint64_t seed, std::uint64_t counter) noexcept {
  return (static_cast<double>(splitmix64_at(seed, counter) >> 11) + 0.5) * 0x1.0p-53;
}

double normal_at(std::uint64_t seed, std::uint64_t entry) noexcept {
  const double u1 = uniform_at(seed, 2 * entry);
  const double u2 = uniform_at(seed, 2 * entry + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> projection_matrix(std::size_t context, std::size_t dim, std::uint64_t seed) {
  std::vector<double> proj(context * dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(context));
  for (std::size_t j = 0; j < proj.size(); ++j) proj[j] = normal_at(seed, j) * scale;
  return proj;
}

EmbeddingSequence reference_embed(const io::TimeSeries& series, const io::WindowPlan& plan,
                                  std::size_t context, std::size_t dim, std::uint64_t seed) {
  if (context == 0 || dim == 0) throw Error(ErrorCode::InvalidParameter, "context and dim must be >= 1");
  if (series.values.empty()) throw Error(ErrorCode::EmptySeries, "cannot embed an empty series");

  const auto proj = projection_matrix(context, dim, seed);
  const auto refs = plan.row_refs();
  std::vector<float> out(refs.size() * dim);
  std::vector<double> ctx(context);
  std::vector<double> acc(dim);
  const auto w = static_cast<std::ptrdiff_t>(context);

  for (std::size_t r = 0; r < refs.size(); ++r) {
    const auto t = static_cast<std::ptrdiff_t>(refs[r].timestep);
    // Shifted by the first context value so a constant context centres to exact zeros.
    const double anchor = io::value_at(series, t - w + 1);
    double mean = 0.0;
    for (std::ptrdiff_t i = 0; i < w; ++i) {
      ctx[static_cast<std::size_t>(i)] = io::value_at(series, t - w + 1 + i) - anchor;
      mean += ctx[static_cast<std::size_t>(i)];
    }
    mean /= static_cast<double>(context);
    double var = 0.0;
    for (auto& v : ctx) {
      v -= mean;
      var += v * v;
    }
    const double sd = std::max(std::sqrt(var / static_cast<double>(context)), 1e-8);

    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < context; ++i) {
      const double c = ctx[i] / sd;
      const double* prow = proj.data() + i * dim;
      for (std::size_t k = 0; k < dim; ++k) acc[k] += c * prow[k];
    }
    for (std::size_t k = 0; k < dim; ++k) out[r * dim + k] = static_cast<float>(acc[k]);
  }
  return {refs.size(), dim, std::move(out),
          "reference-rp:w=" + std::to_string(context) + ":d=" + std::to_string(dim) +
              ":seed=" + std::to_string(seed)};
}

}  // namespace themis::embed
