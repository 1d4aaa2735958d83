#include "blaze/load_file.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>

#include "blaze/detail/partition.hpp"

namespace blaze {

namespace {

// Lines of `path` (size `file_size`) whose first byte lies in [lo, hi).
void read_lines(const std::string& path, std::uint64_t file_size, std::uint64_t lo, std::uint64_t hi,
                std::vector<std::string>& out) {
  if (lo >= hi) return;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);

  // A line starts at lo when lo is the file start or follows a newline.
  const std::uint64_t read_from = lo == 0 ? 0 : lo - 1;
  std::string buf(hi - read_from, '\0');
  in.seekg(static_cast<std::streamoff>(read_from));
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::uint64_t>(in.gcount()) != buf.size()) {
    throw InputError("short read from " + path + " (file changed while loading?)");
  }

  std::size_t pos = 0;
  if (lo > 0) {
    if (buf[0] == '\n') {
      pos = 1;
    } else {
      const auto nl = buf.find('\n', 1);
      if (nl == std::string::npos) return;  // No line starts in range.
      pos = nl + 1;
    }
  }
  const std::size_t range_end = buf.size();
  while (pos < range_end) {
    const auto nl = buf.find('\n', pos);
    if (nl != std::string::npos) {
      out.emplace_back(buf, pos, nl - pos);
      pos = nl + 1;
      continue;
    }
    // The last line in range runs past hi; read on to its newline or EOF.
    std::string line = buf.substr(pos);
    std::uint64_t at = read_from + range_end;
    char chunk[4096];
    while (at < file_size) {
      const auto want = static_cast<std::streamsize>(std::min<std::uint64_t>(sizeof(chunk), file_size - at));
      in.read(chunk, want);
      const auto got = in.gcount();
      if (got <= 0) break;
      const std::string_view piece(chunk, static_cast<std::size_t>(got));
      const auto end = piece.find('\n');
      if (end != std::string_view::npos) {
        line.append(piece.substr(0, end));
        break;
      }
      line.append(piece);
      at += static_cast<std::uint64_t>(got);
    }
    out.push_back(std::move(line));
    break;
  }
}

}  // namespace

DistVector<std::string> load_file(Context& ctx, const std::string& path) {
  return load_file(ctx, std::vector<std::string>{path});
}

DistVector<std::string> load_file(Context& ctx, const std::vector<std::string>& paths) {
  std::vector<std::uint64_t> sizes(paths.size(), 0);
  std::exception_ptr failure;
  try {
    for (std::size_t i = 0; i < paths.size(); ++i) {
      std::error_code ec;
      const auto sz = std::filesystem::file_size(paths[i], ec);
      if (ec) throw InputError("cannot read " + paths[i] + ": " + ec.message());
      sizes[i] = sz;
    }
  } catch (...) {
    failure = std::current_exception();
  }
  ctx.check_job(failure);

  // Every worker must see the same bytes.
  WireBuffer mine;
  for (auto s : sizes) mine.put_varint(s);
  const auto seen = ctx.all_gather(mine.bytes());
  for (std::size_t r = 0; r < seen.size(); ++r) {
    if (seen[r] != mine.bytes()) {
      WireBuffer theirs(seen[r]);
      for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto s = theirs.get_varint();
        if (s != sizes[i]) {
          throw InputError("file size mismatch for " + paths[i] + ": rank " + std::to_string(ctx.rank()) + " sees " +
                           std::to_string(sizes[i]) + " bytes, rank " + std::to_string(r) + " sees " +
                           std::to_string(s));
        }
      }
    }
  }

  std::uint64_t total = 0;
  for (auto s : sizes) total += s;
  const auto [lo, hi] = detail::block_range(total, ctx.rank(), ctx.size());

  std::vector<std::string> lines;
  failure = nullptr;
  try {
    std::uint64_t file_start = 0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const std::uint64_t file_end = file_start + sizes[i];
      const std::uint64_t a = std::max<std::uint64_t>(lo, file_start);
      const std::uint64_t b = std::min<std::uint64_t>(hi, file_end);
      if (a < b) read_lines(paths[i], sizes[i], a - file_start, b - file_start, lines);
      file_start = file_end;
    }
  } catch (...) {
    failure = std::current_exception();
  }
  ctx.check_job(failure);
  return DistVector<std::string>(ctx, std::move(lines));
}

}  // namespace blaze
