#pragma once

#include <array>
#include <string_view>

#include "condyr/nquads.hpp"
#include "condyr/store.hpp"

namespace condyr::sample {

/// Three snapshots of a small social graph over named graphs :g1 and :g2.
inline constexpr std::array<std::string_view, 3> kVersions = {
    "<:alice> <ex:knows> <:bob> <:g1> .\n"
    "<:alice> <ex:likes> \"sushi\" <:g1> .\n",

    "<:alice> <ex:knows> <:bob> <:g1> .\n"
    "<:bob> <ex:likes> \"pizza\" <:g1> .\n"
    "<:bob> <ex:knows> <:carol> <:g2> .\n",

    "<:alice> <ex:knows> <:bob> <:g1> .\n"
    "<:alice> <ex:likes> \"sushi\" <:g1> .\n"
    "<:bob> <ex:likes> \"pizza\" <:g1> .\n"
    "<:carol> <ex:knows> <:alice> <:g2> .\n"
    "<:bob> <ex:knows> <:carol> <:g2> .\n",
};

inline constexpr std::string_view kKnows = "?s <ex:knows> ?o ?g .\n";

inline constexpr std::string_view kKnowsLikes =
    "?s <ex:knows> ?o ?g .\n"
    "?o <ex:likes> ?liked ?g .\n";

inline constexpr std::string_view kKnowsInVersion =
    "?s <ex:knows> ?o ?g .\n"
    "?g <v:in-version> ?v <ng:Metadata> .\n";

inline constexpr std::string_view kCountKnown =
    "SELECT ?o (COUNT(?s) AS ?count)\n"
    "WHERE {\n"
    "  ?s <ex:knows> ?o ?g .\n"
    "}\n"
    "GROUP BY ?o\n";

inline Store load() {
  Store store;
  for (std::size_t i = 0; i < kVersions.size(); ++i) {
    IngestOptions opts;
    opts.label = "v" + std::to_string(i + 1) + ".nq";
    store.ingest_version(parse_nquads(kVersions[i]), opts);
  }
  return store;
}

}  // namespace condyr::sample
