#pragma once

#include <string>
#include <tuple>

#include "fairhub/dictionary.hpp"
#include "fairhub/metadata.hpp"
#include "fairhub/tabledata.hpp"

namespace fairhub {

struct BundleKey {
  std::string study;
  std::string file_name;
  int version = 1;

  friend auto operator<=>(const BundleKey&, const BundleKey&) = default;
};

/// Data table, its dictionary and its file metadata: the unit of curation.
struct FileBundle {
  Table table;
  DataDictionary dictionary;
  FileMetadata file_metadata;

  BundleKey key() const {
    return {file_metadata.study, file_metadata.file_name, file_metadata.version};
  }

  friend bool operator==(const FileBundle&, const FileBundle&) = default;
};

}  // namespace fairhub
