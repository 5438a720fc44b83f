#pragma once

#include <string>

#include "adaptive/index.hpp"
#include "adaptive/store.hpp"

namespace adaptive {

// Parsed archive file: the descriptor snapshot plus the record body.
struct ArchiveData {
  TableId table_id = 0;
  Range range;
  TimeInterval time_range;
  std::vector<TrackPoint> records;
};

// Line 1: APV1 <table_id> <range...> <t_start> <t_end> <count> <crc32-hex>
// then one record per line: device_id,lat,lon,reported_at (6-decimal coords).
// The checksum is CRC-32 of the body bytes.
std::string encode_archive(const TableDescriptor& desc,
                           const TableStore& store);

// Throws Error(ChecksumMismatch) on a corrupt body, Error(Corruption) on a
// malformed file.
ArchiveData decode_archive(const std::string& text);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// True when the table may be archived: closed, and past retention.
bool archive_eligible(const TableDescriptor& desc, Tick retention, Tick now);

}  // namespace adaptive
