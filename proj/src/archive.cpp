#include "adaptive/archive.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "adaptive/error.hpp"

namespace adaptive {

namespace {

std::string crc_hex(const std::string& body) {
  const uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                          static_cast<uInt>(body.size()));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

}  // namespace

std::string encode_archive(const TableDescriptor& desc,
                           const TableStore& store) {
  if (desc.time_range.is_open())
    throw Error(ErrorCode::NotEligible, "cannot archive a live table");
  std::ostringstream body;
  for (const auto& p : store.records()) {
    body << p.device_id << ',' << format_coord(p.lat) << ','
         << format_coord(p.lon) << ',' << p.reported_at << '\n';
  }
  const std::string body_text = body.str();
  std::ostringstream out;
  out << "APV1 " << desc.id << ' ' << range_to_string(desc.range) << ' '
      << desc.time_range.start << ' ' << *desc.time_range.end << ' '
      << store.size() << ' ' << crc_hex(body_text) << '\n'
      << body_text;
  return out.str();
}

ArchiveData decode_archive(const std::string& text) {
  const auto header_end = text.find('\n');
  if (header_end == std::string::npos)
    throw Error(ErrorCode::Corruption, "archive missing header line");
  std::istringstream header(text.substr(0, header_end));
  std::string magic;
  header >> magic;
  if (magic != "APV1")
    throw Error(ErrorCode::Corruption, "bad archive magic: " + magic);

  ArchiveData data;
  if (!(header >> data.table_id))
    throw Error(ErrorCode::Corruption, "archive header truncated");
  data.range = range_from_stream(header);
  Tick t_start = 0, t_end = 0;
  std::size_t count = 0;
  std::string checksum;
  if (!(header >> t_start >> t_end >> count >> checksum))
    throw Error(ErrorCode::Corruption, "archive header truncated");
  data.time_range = TimeInterval{t_start, t_end};

  const std::string body = text.substr(header_end + 1);
  if (crc_hex(body) != checksum)
    throw Error(ErrorCode::ChecksumMismatch, "archive body checksum mismatch");

  std::istringstream lines(body);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    TrackPoint p;
    std::istringstream row(line);
    std::string lat, lon, tick;
    if (!std::getline(row, p.device_id, ',') || !std::getline(row, lat, ',') ||
        !std::getline(row, lon, ',') || !std::getline(row, tick))
      throw Error(ErrorCode::Corruption, "malformed archive record: " + line);
    try {
      p.lat = std::stod(lat);
      p.lon = std::stod(lon);
      p.reported_at = std::stoll(tick);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Corruption, "malformed archive record: " + line);
    }
    data.records.push_back(std::move(p));
  }
  if (data.records.size() != count)
    throw Error(ErrorCode::Corruption,
                "archive record count does not match header");
  return data;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open for writing: " + path);
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool archive_eligible(const TableDescriptor& desc, Tick retention, Tick now) {
  return desc.state == TableState::Closed && desc.time_range.end &&
         *desc.time_range.end + retention <= now;
}

}  // namespace adaptive
