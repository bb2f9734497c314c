#include "mongolog/database.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace mongolog {

namespace fs = std::filesystem;

const Forest& Database::collection(const std::string& name) const {
  static const Forest empty;
  auto it = collections_.find(name);
  return it == collections_.end() ? empty : it->second;
}

const Forest& Database::c_one() {
  static const Forest one = [] {
    ValueObject doc;
    doc.emplace("_id", Value(std::int64_t(1)));
    return Forest{Tree{Value(std::move(doc)), {}}};
  }();
  return one;
}

std::string Database::fact_collection_name(const std::string& functor, std::size_t arity) {
  return functor + "/" + std::to_string(arity);
}

void Database::insert_fact(const Term& fact) {
  if (!fact.is_ground()) throw structure_error("only ground facts can be stored");
  std::string functor = fact.is_constant() ? (fact.is_atom() ? fact.symbol() : fact.constant_value().to_json())
                                           : fact.symbol();
  std::size_t arity = fact.is_compound() ? fact.arity() : 0;
  Forest& coll = collections_[fact_collection_name(functor, arity)];

  std::int64_t next_id = 1;
  for (const Tree& t : coll) {
    Value id = subtree(t, Path::parse("_id"));
    if (id.is_int() && id.as_int() >= next_id) next_id = id.as_int() + 1;
  }

  FlatTerm flat = flatten(fact, Path::root(), Path::root(), Tree{});
  ValueObject doc;
  doc.emplace("_id", Value(next_id));
  for (const FlatElem& e : flat) doc.emplace(e.key, *e.value);
  coll.push_back(Tree{Value(std::move(doc)), {}});
}

namespace {

bool is_index_key(const std::string& key) {
  if (key.empty()) return false;
  bool in_segment = false;
  for (char c : key) {
    if (c == '.') {
      if (!in_segment) return false;
      in_segment = false;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      in_segment = true;
    } else {
      return false;
    }
  }
  return in_segment;
}

Forest load_jsonl(const fs::path& file, bool strict_fact_keys) {
  std::ifstream in(file);
  if (!in) throw structure_error("cannot open " + file.string());
  Forest out;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
    if (trimmed.empty()) continue;
    Value doc;
    try {
      doc = Value::parse_json(trimmed);
    } catch (const eval_error& e) {
      throw structure_error(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!doc.is_object())
      throw structure_error(file.string() + ":" + std::to_string(line_no) +
                            ": each line must be a JSON object");
    bool has_id = false;
    for (const auto& [key, v] : doc.as_object()) {
      (void)v;
      if (key == "_id") {
        has_id = true;
        continue;
      }
      if (strict_fact_keys) {
        if (!is_index_key(key))
          throw structure_error(file.string() + ":" + std::to_string(line_no) +
                                ": fact document key must be a dotted index, got \"" + key + "\"");
      } else if (key.find('.') != std::string::npos) {
        throw structure_error(file.string() + ":" + std::to_string(line_no) +
                              ": document keys must not contain '.', got \"" + key + "\"");
      }
    }
    if (strict_fact_keys) {
      if (!has_id)
        throw structure_error(file.string() + ":" + std::to_string(line_no) +
                              ": fact document is missing _id");
      std::string id_repr = doc.as_object().at("_id").to_json();
      if (!seen_ids.insert(id_repr).second)
        throw structure_error(file.string() + ":" + std::to_string(line_no) +
                              ": duplicate _id " + id_repr);
    }
    out.push_back(Tree{std::move(doc), {}});
  }
  return out;
}

}  // namespace

Database load_database(const std::string& dir) {
  Database db;
  if (!fs::is_directory(dir)) throw structure_error("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& file : files) {
    // <functor>.<arity>.jsonl
    std::string stem = file.stem().string();
    std::size_t dot = stem.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == stem.size())
      throw structure_error("fact file name must be <functor>.<arity>.jsonl: " + file.string());
    std::string arity_part = stem.substr(dot + 1);
    if (!std::all_of(arity_part.begin(), arity_part.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      throw structure_error("fact file name must end in a numeric arity: " + file.string());
    std::string name = stem.substr(0, dot) + "/" + arity_part;
    db.collection_mutable(name) = load_jsonl(file, true);
  }
  return db;
}

Database load_collections(const std::string& dir) {
  Database db;
  if (!fs::is_directory(dir)) throw structure_error("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& file : files)
    db.collection_mutable(file.stem().string()) = load_jsonl(file, false);
  return db;
}

void save_database(const Database& db, const std::string& dir) {
  fs::create_directories(dir);
  for (const auto& [name, forest] : db.collections()) {
    std::size_t slash = name.rfind('/');
    if (slash == std::string::npos) continue;
    std::string file_name = name.substr(0, slash) + "." + name.substr(slash + 1) + ".jsonl";
    std::ofstream out(fs::path(dir) / file_name);
    if (!out) throw structure_error("cannot write " + (fs::path(dir) / file_name).string());
    for (const Tree& t : forest) out << t.root.to_json() << "\n";
  }
}

}  // namespace mongolog
