#pragma once

// Text and JSON exchange formats, report serialization and content hashes.

#include "hasse/arcs.hpp"
#include "hasse/counting.hpp"
#include "hasse/densities.hpp"
#include "hasse/int_matrix.hpp"
#include "hasse/pipeline.hpp"

#include "json.hpp"

#include <string>

namespace hasse {

using Json = nlohmann::ordered_json;

std::string read_file(const std::string &path);

/// "rows cols" then rows of integers, or {"rows", "cols", "entries"} with
/// entries flat row-major or nested. Lines starting with '#' are ignored.
IntMatrix parse_matrix(const std::string &text);
Json matrix_to_json(const IntMatrix &m);
IntMatrix matrix_from_json(const Json &j);

/// Blocks "cubic r s" and "quadratic r s", each followed by r rows; either
/// may be missing. JSON form {"cubic": matrix, "quadratic": matrix}.
MixedSystem parse_system(const std::string &text);
std::string format_system(const MixedSystem &sys);
Json system_to_json(const MixedSystem &sys);

/// SHA-1 of "blob <size>\0" + content, as git computes object ids.
std::string git_blob_sha1(const std::string &content);

Json to_json(const CountRecord &r);
Json to_json(const GrowthFit &f);
Json to_json(const ArcLabel &l);
Json to_json(const SeriesValue &v);
Json to_json(const CongruenceCount &c);
Json to_json(const ChiP &c);
Json to_json(const ChiInfinityResult &r);
Json to_json(const SingularIntegral &j);
Json to_json(const LocalWitness &w);
Json to_json(const DensityOptions &o);
Json to_json(const DensityReport &r);
Json to_json(const AsymptoticReport &r);
Json to_json(const SuiteReport &r);

} // namespace hasse
