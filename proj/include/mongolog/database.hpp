#pragma once

#include <map>
#include <string>

#include "mongolog/json_tree.hpp"
#include "mongolog/term.hpp"

namespace mongolog {

// An in-memory database: named collections of documents.
//
// Fact collections are named "<functor>/<arity>" and hold term documents
// whose keys are the canonical index keys of the flattened fact plus "_id".
class Database {
 public:
  bool has_collection(const std::string& name) const { return collections_.count(name) > 0; }
  const Forest& collection(const std::string& name) const;
  Forest& collection_mutable(const std::string& name) { return collections_[name]; }
  const std::map<std::string, Forest>& collections() const { return collections_; }

  // The single-document helper collection [{_id: 1}].
  static const Forest& c_one();

  // Adds a ground fact, assigning the next sequential _id in its collection.
  void insert_fact(const Term& fact);

  static std::string fact_collection_name(const std::string& functor, std::size_t arity);

 private:
  std::map<std::string, Forest> collections_;
};

// Loads fact collections from <dir>/<functor>.<arity>.jsonl files.  Each line
// is one document; keys must be "_id" or dotted numeric index keys, and every
// document needs a distinct "_id" within its file.  Malformed input throws.
Database load_database(const std::string& dir);

// Loads arbitrary document collections from <dir>/<name>.jsonl files for
// direct pipeline evaluation.  Keys may be any field names without dots.
Database load_collections(const std::string& dir);

// Writes every fact collection back out as <functor>.<arity>.jsonl.
void save_database(const Database& db, const std::string& dir);

}  // namespace mongolog
