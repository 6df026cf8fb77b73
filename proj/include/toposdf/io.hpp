#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "toposdf/cubical.hpp"
#include "toposdf/pointcloud.hpp"
#include "toposdf/sdf_model.hpp"
#include "toposdf/surface.hpp"
#include "toposdf/tensor.hpp"
#include "toposdf/trainer.hpp"

namespace toposdf {

namespace fs = std::filesystem;

/// Whitespace separated "x y z [more columns]" lines; '#' lines and blank
/// lines are skipped. Needs at least two points.
std::vector<Vec3> load_xyz(const fs::path& path);
std::vector<Vec3> parse_xyz(const std::string& text);

/// Minimal ascii PLY: reads x, y, z of the vertex element, skips everything else.
std::vector<Vec3> load_ply_ascii(const fs::path& path);
std::vector<Vec3> parse_ply_ascii(const std::string& text);

/// Dispatches on the extension (.xyz, .txt, .pts, .ply).
std::vector<Vec3> load_points(const fs::path& path);
void save_xyz(const std::vector<Vec3>& points, const fs::path& path);

void save_obj(const TriangleMesh& mesh, const fs::path& path);
std::string format_obj(const TriangleMesh& mesh);
TriangleMesh load_obj(const fs::path& path);

inline constexpr const char* kDiagramHeader = "dim,birth,death,birth_index,death_index,essential";
inline constexpr const char* kHistoryHeader =
    "iter,loss_total,loss_pull,loss_sig,loss_noise,lr,dropped_queries";

/// Rows sorted by birth, then birth index. Values use the shortest
/// representation that reads back to the same double.
std::string format_diagram(const PersistenceDiagram& diagram);
void export_diagram(const PersistenceDiagram& diagram, const fs::path& path);
/// Pairs in file order; grid dims and filtration are not part of the format.
PersistenceDiagram parse_diagram(const std::string& text);
PersistenceDiagram import_diagram(const fs::path& path);

std::string format_history(const TrainHistory& history);
void save_history_csv(const TrainHistory& history, const fs::path& path);

inline constexpr char kCheckpointMagic[4] = {'S', 'T', 'C', 'H'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// magic, u32 version, u32 layer_count, u32 hidden_width, u32 skip_layer,
/// u64 parameter count, then little-endian f64 parameters in flatten() order.
std::string encode_checkpoint(const SdfModel& model);
SdfModel decode_checkpoint(const std::string& bytes);
void save_checkpoint(const SdfModel& model, const fs::path& path);
SdfModel load_checkpoint(const fs::path& path);

/// "scale = ..." and "translation = x y z", the map from normalized to source units.
void save_transform(const SourceTransform& t, const fs::path& path);
SourceTransform load_transform(const fs::path& path);

std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace toposdf
