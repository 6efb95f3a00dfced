#pragma once

#include "isoflow/scalarize.hpp"

#include <array>
#include <optional>
#include <vector>

namespace isoflow {

/// Point location and edge pairing on the cut mesh of a ScalarPair. Build once, query many
/// times; read-only afterwards.
class PairIndex {
public:
    explicit PairIndex(const ScalarPair& pair);

    const ScalarPair& pair() const { return *pair_; }
    /// Triangle containing x (lowest index on shared edges), -1 outside.
    int locate(Vec2 x) const;
    /// Every triangle containing x, ascending.
    std::vector<int> locate_all(Vec2 x) const;
    bool excised(int t) const { return tri_excised_[static_cast<std::size_t>(t)] != 0; }
    /// PL value of `values` at x inside triangle t.
    double interpolate(const std::vector<double>& values, int t, Vec2 x) const;

    // neighbour across edge k of t (k runs from corner k to k+1); -1 on cuts and the boundary
    int neighbour(int t, int k) const { return nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)]; }
    // cut edge behind edge k of t: index into cut_mesh->edges and whether t is on its left
    struct CutSide {
        int edge = -1;
        bool left = false;
    };
    CutSide cut_side(int t, int k) const { return cut_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)]; }
    double median_edge() const { return median_edge_; }

private:
    const ScalarPair* pair_;
    std::vector<std::array<int, 3>> nbr_;
    std::vector<std::array<CutSide, 3>> cut_;
    std::vector<char> tri_excised_;
    BBox box_;
    double cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> cells_;
    double median_edge_ = 0.0;
};

struct CutCrossing {
    int path = -1;
    int sign = 0;  // +1 leaving the left side of the path
    Vec2 point;
};

/// Isoline lookup replacing forward integration.
struct FlowQueryResult {
    bool out_of_domain = false;
    Vec2 endpoint;         // target point, or where the isoline leaves the domain
    double tau_exit = 0.0;  // time at which the isoline left (out_of_domain only)
    std::vector<CutCrossing> crossings;
    /// Net signed crossings per path.
    std::vector<int> multiplicities(std::size_t paths) const;
};

/// Endpoint of the streamline through x after time tau, found by walking the isoline
/// a = a(x) until b reaches b(x) + tau. Throws EntersExcisedRegion, OutOfDomain for x.
FlowQueryResult advect_lookup(const PairIndex& index, Vec2 x, double tau);

enum class StreamSide { None, Left, Right };
const char* side_name(StreamSide s);

struct ConnectivityResult {
    bool connected = false;
    StreamSide side = StreamSide::None;
    double distance = 0.0;   // first-order estimate |a2 - a_closest| / |grad a|
    double delta_tau = 0.0;  // connected only; negative when x2 lies upstream
    bool crossed_cut = false;
    std::vector<CutCrossing> crossings;
};

/// Does the streamline through x1 pass through x2? Walks the isoline of a through x1 both
/// ways; never integrates. Throws EntersExcisedRegion when either point is excised.
ConnectivityResult connectivity(const PairIndex& index, Vec2 x1, Vec2 x2);

enum class FieldSel { A, B };

struct Isoline {
    std::vector<Vec2> points;
    bool closed = false;
};

/// Marching-triangle isolines of a (or b) at `value`, continued across cuts with the jump
/// applied. Excised triangles end a polyline.
std::vector<Isoline> extract_isoline(const PairIndex& index, double value, FieldSel sel = FieldSel::A);

}  // namespace isoflow
