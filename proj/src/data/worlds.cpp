#include "data/worlds.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

#include "data/render.hpp"
#include "errors.hpp"
#include "logic/parser.hpp"
#include "math/params.hpp"

namespace abdgen::data {

namespace fs = std::filesystem;
using logic::Term;

namespace {

const char* kMarioBk = R"(% 3x3 grid, row-major cells 0..8, row 0 at the top.
% The walk always terminates at the top-right cell.
right_of(0,1). right_of(1,2). right_of(3,4). right_of(4,5). right_of(6,7). right_of(7,8).
left_of(1,0). left_of(2,1). left_of(4,3). left_of(5,4). left_of(7,6). left_of(8,7).
up_of(3,0). up_of(4,1). up_of(5,2). up_of(6,3). up_of(7,4). up_of(8,5).
down_of(0,3). down_of(1,4). down_of(2,5). down_of(3,6). down_of(4,7). down_of(5,8).
no_right(2). no_right(5). no_right(8).
term_cell(2).

%% rule moves
moves_ok:-first(I),moves_from(I).
moves_from(I):-last(I).
moves_from(I):-next(I,J),pos(I,P),pos(J,Q),step(P,Q),moves_from(J).
%% end
step(P,Q):-right_of(P,Q).
step(P,Q):-up_of(P,Q).
step(P,Q):-left_of(P,Q).
step(P,Q):-down_of(P,Q).

%% rule priority
priority_ok:-first(I),pri_from(I).
pri_from(I):-last(I).
pri_from(I):-next(I,J),pos(I,P),pos(J,Q),pref(P,Q),pri_from(J).
%% end
pref(P,Q):-right_of(P,Q).
pref(P,Q):-no_right(P),up_of(P,Q).

%% rule integrity
integrity_ok:-first(I),int_from(I).
int_from(I):-last(I),has_pos(I).
int_from(I):-next(I,J),has_pos(I),int_from(J).
%% end
has_pos(I):-pos(I,P).

% movement relations over case images, used during rule induction
right(I,J):-next(I,J),pos(I,P),pos(J,Q),right_of(P,Q).
up(I,J):-next(I,J),pos(I,P),pos(J,Q),up_of(P,Q).
left(I,J):-next(I,J),pos(I,P),pos(J,Q),left_of(P,Q).
down(I,J):-next(I,J),pos(I,P),pos(J,Q),down_of(P,Q).
terminate(I,I):-last(I),pos(I,P),term_cell(P).

%% body_pred right/2
%% body_pred up/2
%% body_pred left/2
%% body_pred down/2
%% body_pred terminate/2
)";

const char* kMarioMetarules = R"(metarule(ident, [P,Q], [P,A,B], [[Q,A,B]]).
metarule(chain, [P,Q,R], [P,A,B], [[Q,A,C],[R,C,B]]).
metarule(tailrec, [P,Q], [P,A,B], [[Q,A,C],[P,C,B]]).
)";

const char* kMarioReference = R"(f(A,B):-right(A,C),f(C,B).
f(A,B):-f_1(A,B).
f_1(A,B):-up(A,C),f_1(C,B).
f_1(A,B):-terminate(A,B).
)";

const char* kShapesBk = R"(% three shapes x three scales x four orientation quadrants
compat(0,0). compat(0,1). compat(1,1). compat(1,2). compat(2,2). compat(2,3).

%% rule scale_step
scale_ok:-first(I),sc_from(I).
sc_from(I):-last(I).
sc_from(I):-next(I,J),scale(I,A),scale(J,B),succ(A,B),sc_from(J).
%% end
%% rule orient_step
orient_ok:-first(I),or_from(I).
or_from(I):-last(I).
or_from(I):-next(I,J),orientation(I,A),orientation(J,B),succ(A,B),or_from(J).
%% end
%% rule shape_scale
shape_scale_ok:-first(I),ss_from(I).
ss_from(I):-last(I),ss_at(I).
ss_from(I):-next(I,J),ss_at(I),ss_from(J).
%% end
ss_at(I):-shape(I,S),scale(I,S).
%% rule shape_orient
shape_orient_ok:-first(I),so_from(I).
so_from(I):-last(I),so_at(I).
so_from(I):-next(I,J),so_at(I),so_from(J).
%% end
so_at(I):-shape(I,S),orientation(I,O),compat(S,O).
)";

const char* kAttribBk = R"(% identity ordering world: age 0..2 (young..old), gender 0 male / 1 female
%% rule order
order_ok:-first(I),ord_from(I).
ord_from(I):-last(I).
ord_from(I):-next(I,J),ok_pair(I,J),ord_from(J).
%% end
ok_pair(I,J):-age(I,A),age(J,B),gt(A,B).
ok_pair(I,J):-age(I,A),age(J,A),gender(I,G),gender(J,H),gt(G,H).

%% rule integrity
identity_ok:-first(I),id_from(I).
id_from(I):-last(I),has_identity(I).
id_from(I):-next(I,J),has_identity(I),id_from(J).
%% end
has_identity(I):-age(I,A),gender(I,G).

% adjacent-pair value views used during rule induction
ages(I,V):-next(I,J),age(I,A),age(J,B),pairval(A,B,V).
genders(I,V):-next(I,J),gender(I,A),gender(J,B),pairval(A,B,V).
pairval(0,0,v00). pairval(0,1,v01). pairval(0,2,v02).
pairval(1,0,v10). pairval(1,1,v11). pairval(1,2,v12).
pairval(2,0,v20). pairval(2,1,v21). pairval(2,2,v22).
greater_than(v10). greater_than(v20). greater_than(v21).
less_than(v01). less_than(v02). less_than(v12).
equal(v00). equal(v11). equal(v22).

%% body_pred ages/2
%% body_pred genders/2
%% body_pred greater_than/1
%% body_pred less_than/1
%% body_pred equal/1
)";

const char* kAttribMetarules = R"(metarule([P,Q,R,S,T], [P,A], [[Q,A,B],[R,B],[S,A,D],[T,D]]).
metarule([P,Q], [P,A], [[Q,A]]).
metarule([P,Q,R], [P,A], [[Q,A,B],[R,B]]).
metarule([P,Q,R], [P,A,B], [[Q,A,C],[R,C,B]]).
)";

const char* kAttribReference = R"(f(A):-ages(A,B),greater_than(B).
f(A):-ages(A,B),equal(B),genders(A,C),greater_than(C).
)";

// The six attribute-world identities sorted by the generating rule: age
// descending, female (1) before male (0) at ties.
const std::vector<std::vector<std::size_t>> kAttribSorted = {
    {2, 1}, {2, 0}, {1, 1}, {1, 0}, {0, 1}, {0, 0}};

int cell_row(std::size_t c) { return static_cast<int>(c) / 3; }
int cell_col(std::size_t c) { return static_cast<int>(c) % 3; }

enum class Step { right, up, left, down, none };

Step step_between(std::size_t a, std::size_t b) {
    int ra = cell_row(a), ca = cell_col(a), rb = cell_row(b), cb = cell_col(b);
    if (ra == rb && cb == ca + 1) return Step::right;
    if (ra == rb && cb == ca - 1) return Step::left;
    if (ca == cb && rb == ra - 1) return Step::up;
    if (ca == cb && rb == ra + 1) return Step::down;
    return Step::none;
}

// Right-priority walk from a start cell to the terminal corner.
std::vector<std::size_t> mario_trajectory(std::size_t start) {
    std::vector<std::size_t> cells{start};
    std::size_t cur = start;
    while (cur != 2) {
        if (cell_col(cur) < 2)
            cur += 1;
        else
            cur -= 3;
        cells.push_back(cur);
    }
    return cells;
}

// Up-priority walk; differs from the right-priority one away from the edges.
std::vector<std::size_t> mario_up_priority(std::size_t start) {
    std::vector<std::size_t> cells{start};
    std::size_t cur = start;
    while (cur != 2) {
        if (cell_row(cur) > 0)
            cur -= 3;
        else
            cur += 1;
        cells.push_back(cur);
    }
    return cells;
}

Tint tint_from(Rng& rng) {
    return Tint{rng.uniform(0.08, 0.42), rng.uniform(0.08, 0.42), rng.uniform(0.08, 0.42)};
}

struct DatasetWriter {
    fs::path root;
    DatasetManifest manifest;

    explicit DatasetWriter(const std::string& dir, WorldKind kind) : root(dir) {
        fs::create_directories(root / "images");
        manifest.kind = kind;
    }

    void add_case(const std::string& id, bool positive, bool train,
                  const std::vector<math::Tensor>& images,
                  const vq::GroundingAssignment& labels) {
        CaseEntry entry;
        entry.id = id;
        entry.positive = positive;
        entry.train = train;
        entry.labels = labels;
        for (std::size_t k = 0; k < images.size(); ++k) {
            std::string rel = "images/" + id + "_" + std::to_string(k) + ".abdt";
            math::save_tensor((root / rel).string(), images[k], "image");
            entry.images.push_back(rel);
        }
        manifest.cases.push_back(std::move(entry));
    }

    void finish(const char* bk_text, const char* metarule_text) {
        manifest.bk_file = "bk.txt";
        std::ofstream(root / "bk.txt") << bk_text;
        if (metarule_text) {
            manifest.metarule_file = "metarules.txt";
            std::ofstream(root / "metarules.txt") << metarule_text;
        }
        save_manifest(root.string(), manifest);
    }
};

}  // namespace

WorldInfo world_info(WorldKind kind) {
    WorldInfo info;
    info.schema.embed_dim = 16;
    switch (kind) {
        case WorldKind::mario:
            info.image_shape = {3, 27, 27};
            info.schema.symbols = {{"pos", 9}};
            info.max_case_len = 5;
            break;
        case WorldKind::shapes:
            info.image_shape = {1, 32, 32};
            info.schema.symbols = {{"shape", 3}, {"scale", 3}, {"orientation", 4}};
            info.binary_images = true;
            info.max_case_len = 2;
            break;
        case WorldKind::attrib:
            info.image_shape = {3, 27, 27};
            info.schema.symbols = {{"age", 3}, {"gender", 2}};
            info.max_case_len = 6;
            break;
    }
    return info;
}

bool rule_consistent(WorldKind kind, const vq::GroundingAssignment& g) {
    switch (kind) {
        case WorldKind::mario: {
            for (std::size_t k = 0; k + 1 < g.size(); ++k) {
                std::size_t a = g[k][0], b = g[k + 1][0];
                Step s = step_between(a, b);
                bool right_possible = cell_col(a) < 2;
                if (right_possible ? s != Step::right : s != Step::up) return false;
            }
            return true;
        }
        case WorldKind::shapes: {
            for (std::size_t k = 0; k < g.size(); ++k) {
                std::size_t shape = g[k][0], scale = g[k][1], orient = g[k][2];
                if (shape != scale) return false;
                if (orient + 1 < shape + 1 || orient > shape + 1) return false;  // compat band
                if (k + 1 < g.size()) {
                    if (g[k + 1][1] != scale + 1) return false;
                    if (g[k + 1][2] != orient + 1) return false;
                }
            }
            return true;
        }
        case WorldKind::attrib: {
            for (std::size_t k = 0; k + 1 < g.size(); ++k) {
                std::size_t a1 = g[k][0], g1 = g[k][1], a2 = g[k + 1][0], g2 = g[k + 1][1];
                if (a1 > a2) continue;
                if (a1 == a2 && g1 > g2) continue;
                return false;
            }
            return true;
        }
    }
    return false;
}

math::Tensor render_values(WorldKind kind, const std::vector<std::size_t>& values, double tint_a,
                           double tint_b) {
    Tint t{0.1 + 0.3 * tint_a, 0.1 + 0.3 * tint_b, 0.1 + 0.3 * (1.0 - tint_a)};
    switch (kind) {
        case WorldKind::mario: return render_mario(values.at(0), t);
        case WorldKind::shapes: return render_shape(values.at(0), values.at(1), values.at(2));
        case WorldKind::attrib: return render_attrib(values.at(0), values.at(1), t);
    }
    throw ConfigError("render_values: bad world");
}

DatasetManifest gen_mario(const std::string& dir, std::size_t n_cases, std::uint64_t seed) {
    if (n_cases < 1) throw ConfigError("gen_mario: n_cases must be >= 1");
    Rng rng(seed);
    DatasetWriter w(dir, WorldKind::mario);
    WorldInfo info = world_info(WorldKind::mario);
    w.manifest.image_shape = info.image_shape;
    w.manifest.binary_images = info.binary_images;
    w.manifest.max_case_len = info.max_case_len;
    w.manifest.schema = info.schema;

    auto render_traj = [&](const std::vector<std::size_t>& cells, const Tint& t) {
        std::vector<math::Tensor> images;
        for (std::size_t c : cells) images.push_back(render_mario(c, t));
        return images;
    };
    auto labels_of = [](const std::vector<std::size_t>& cells) {
        vq::GroundingAssignment g;
        for (std::size_t c : cells) g.push_back({c});
        return g;
    };

    for (std::size_t i = 0; i < n_cases; ++i) {
        // Sample a start whose complete trajectory has 3..5 images; shorter
        // starts (including the terminal cell itself) are rejected.
        std::vector<std::size_t> cells;
        while (true) {
            std::size_t start = rng.index(9);
            cells = mario_trajectory(start);
            if (cells.size() >= 3 && cells.size() <= 5) break;
        }
        Tint t = tint_from(rng);
        w.add_case("pos" + std::to_string(i), true, i % 10 != 9, render_traj(cells, t),
                   labels_of(cells));
    }

    // Negatives: half order perturbations of right-priority trajectories,
    // half up-priority walks, always rejecting rule-consistent results.
    for (std::size_t i = 0; i < 2 * n_cases; ++i) {
        std::vector<std::size_t> cells;
        if (i % 2 == 0) {
            while (true) {
                std::size_t start = rng.index(9);
                cells = mario_trajectory(start);
                if (cells.size() < 3 || cells.size() > 5) continue;
                rng.shuffle(cells);
                vq::GroundingAssignment g = labels_of(cells);
                if (!rule_consistent(WorldKind::mario, g)) break;
            }
        } else {
            while (true) {
                std::size_t start = rng.index(9);
                cells = mario_up_priority(start);
                if (cells.size() < 3 || cells.size() > 5) continue;
                if (!rule_consistent(WorldKind::mario, labels_of(cells))) break;
            }
        }
        Tint t = tint_from(rng);
        w.add_case("neg" + std::to_string(i), false, true, render_traj(cells, t),
                   labels_of(cells));
    }

    w.finish(kMarioBk, kMarioMetarules);
    return w.manifest;
}

DatasetManifest gen_shapes(const std::string& dir, std::size_t n_cases, std::uint64_t seed) {
    if (n_cases < 1) throw ConfigError("gen_shapes: n_cases must be >= 1");
    Rng rng(seed);
    DatasetWriter w(dir, WorldKind::shapes);
    WorldInfo info = world_info(WorldKind::shapes);
    w.manifest.image_shape = info.image_shape;
    w.manifest.binary_images = info.binary_images;
    w.manifest.max_case_len = info.max_case_len;
    w.manifest.schema = info.schema;

    // All pairs allowed by the four rules: shape==scale, +1 scale step,
    // +1 orientation step, shape/orientation compatibility band.
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> valid;
    for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t o = 0; o < 4; ++o) {
            vq::GroundingAssignment pair{{s, s, o}, {s + 1, s + 1, o + 1}};
            if (o + 1 < 4 && rule_consistent(WorldKind::shapes, pair))
                valid.push_back({pair[0], pair[1]});
        }

    for (std::size_t i = 0; i < n_cases; ++i) {
        const auto& [a, b] = valid[rng.index(valid.size())];
        std::vector<math::Tensor> images{render_shape(a[0], a[1], a[2]),
                                         render_shape(b[0], b[1], b[2])};
        w.add_case("pos" + std::to_string(i), true, i % 10 != 9, images, {a, b});
    }
    w.finish(kShapesBk, nullptr);
    return w.manifest;
}

DatasetManifest gen_attrib(const std::string& dir, std::size_t n_cases, std::uint64_t seed) {
    if (n_cases < 1) throw ConfigError("gen_attrib: n_cases must be >= 1");
    Rng rng(seed);
    DatasetWriter w(dir, WorldKind::attrib);
    WorldInfo info = world_info(WorldKind::attrib);
    w.manifest.image_shape = info.image_shape;
    w.manifest.binary_images = info.binary_images;
    w.manifest.max_case_len = info.max_case_len;
    w.manifest.schema = info.schema;

    auto render_seq = [&](const vq::GroundingAssignment& seq, const Tint& t) {
        std::vector<math::Tensor> images;
        for (const auto& v : seq) images.push_back(render_attrib(v[0], v[1], t));
        return images;
    };
    vq::GroundingAssignment sorted(kAttribSorted.begin(), kAttribSorted.end());

    for (std::size_t i = 0; i < n_cases; ++i) {
        Tint t = tint_from(rng);
        w.add_case("pos" + std::to_string(i), true, i % 10 != 9, render_seq(sorted, t), sorted);
    }

    for (std::size_t i = 0; i < n_cases; ++i) {
        vq::GroundingAssignment seq = sorted;
        switch (i % 4) {
            case 0: {  // adjacent swap inside an age tie: breaks gender order only
                std::size_t k = 2 * rng.index(3);
                std::swap(seq[k], seq[k + 1]);
                break;
            }
            case 1: {  // adjacent swap across an age boundary: ascending age
                std::size_t k = 1 + 2 * rng.index(2);
                std::swap(seq[k], seq[k + 1]);
                break;
            }
            case 2: {  // gender-major order: age ascends only where gender drops
                seq = {{2, 1}, {1, 1}, {0, 1}, {2, 0}, {1, 0}, {0, 0}};
                break;
            }
            default: {
                do {
                    rng.shuffle(seq);
                } while (rule_consistent(WorldKind::attrib, seq));
                break;
            }
        }
        if (rule_consistent(WorldKind::attrib, seq))
            throw ConfigError("gen_attrib: generated a consistent negative");
        Tint t = tint_from(rng);
        w.add_case("neg" + std::to_string(i), false, true, render_seq(seq, t), seq);
    }

    w.finish(kAttribBk, kAttribMetarules);
    return w.manifest;
}

DatasetManifest generate_dataset(WorldKind kind, const std::string& dir, std::size_t n_cases,
                                 std::uint64_t seed) {
    switch (kind) {
        case WorldKind::mario: return gen_mario(dir, n_cases, seed);
        case WorldKind::shapes: return gen_shapes(dir, n_cases, seed);
        case WorldKind::attrib: return gen_attrib(dir, n_cases, seed);
    }
    throw ConfigError("generate_dataset: bad world");
}

// --- induction plumbing -------------------------------------------------------

void append_case_facts(WorldKind kind, const vq::GroundingAssignment& g,
                       const std::string& prefix, logic::FactSet& facts) {
    auto img = [&prefix](std::size_t k) { return Term::constant(prefix + std::to_string(k)); };
    switch (kind) {
        case WorldKind::mario: {
            for (std::size_t k = 0; k + 1 < g.size(); ++k) {
                switch (step_between(g[k][0], g[k + 1][0])) {
                    case Step::right: facts.add(Term::app("right", {img(k), img(k + 1)})); break;
                    case Step::up: facts.add(Term::app("up", {img(k), img(k + 1)})); break;
                    case Step::left: facts.add(Term::app("left", {img(k), img(k + 1)})); break;
                    case Step::down: facts.add(Term::app("down", {img(k), img(k + 1)})); break;
                    case Step::none: break;  // teleport: no movement fact
                }
            }
            if (!g.empty() && g.back()[0] == 2)
                facts.add(Term::app("terminate", {img(g.size() - 1), img(g.size() - 1)}));
            return;
        }
        case WorldKind::attrib: {
            auto pair_const = [](std::size_t a, std::size_t b) {
                return Term::constant("v" + std::to_string(a) + std::to_string(b));
            };
            for (std::size_t k = 0; k + 1 < g.size(); ++k) {
                facts.add(Term::app("ages", {img(k), pair_const(g[k][0], g[k + 1][0])}));
                facts.add(Term::app("genders", {img(k), pair_const(g[k][1], g[k + 1][1])}));
            }
            return;
        }
        case WorldKind::shapes:
            throw ConfigError("append_case_facts: shapes world has no induction task");
    }
}

mil::Goal case_goal(WorldKind kind, const std::string& prefix, std::size_t n_images) {
    mil::Goal goal;
    switch (kind) {
        case WorldKind::mario:
            goal.atoms.push_back(Term::app(
                "f", {Term::constant(prefix + "0"),
                      Term::constant(prefix + std::to_string(n_images - 1))}));
            return goal;
        case WorldKind::attrib:
            for (std::size_t k = 0; k + 1 < n_images; ++k)
                goal.atoms.push_back(
                    Term::app("f", {Term::constant(prefix + std::to_string(k))}));
            return goal;
        case WorldKind::shapes:
            throw ConfigError("case_goal: shapes world has no induction task");
    }
    return goal;
}

const logic::Program& reference_rule(WorldKind kind) {
    static logic::Program mario = logic::parse_program(kMarioReference);
    static logic::Program attrib = logic::parse_program(kAttribReference);
    switch (kind) {
        case WorldKind::mario: return mario;
        case WorldKind::attrib: return attrib;
        case WorldKind::shapes: break;
    }
    throw ConfigError("reference_rule: shapes world has no induction task");
}

const logic::Program& world_support(WorldKind kind) {
    static logic::Program empty;
    static logic::Program attrib = logic::parse_program(
        "greater_than(v10). greater_than(v20). greater_than(v21).\n"
        "less_than(v01). less_than(v02). less_than(v12).\n"
        "equal(v00). equal(v11). equal(v22).\n");
    return kind == WorldKind::attrib ? attrib : empty;
}

const std::vector<vq::GroundingAssignment>& domain_cases(WorldKind kind) {
    static std::vector<vq::GroundingAssignment> mario = [] {
        std::vector<vq::GroundingAssignment> out;
        // every legal-step walk of 3..5 images
        std::function<void(vq::GroundingAssignment&)> rec = [&](vq::GroundingAssignment& seq) {
            if (seq.size() >= 3) out.push_back(seq);
            if (seq.size() == 5) return;
            std::size_t cur = seq.back()[0];
            for (std::size_t next = 0; next < 9; ++next) {
                if (step_between(cur, next) == Step::none) continue;
                seq.push_back({next});
                rec(seq);
                seq.pop_back();
            }
        };
        for (std::size_t start = 0; start < 9; ++start) {
            vq::GroundingAssignment seq{{start}};
            rec(seq);
        }
        return out;
    }();
    static std::vector<vq::GroundingAssignment> attrib = [] {
        std::vector<vq::GroundingAssignment> out;
        vq::GroundingAssignment perm(kAttribSorted.begin(), kAttribSorted.end());
        std::sort(perm.begin(), perm.end());
        do {
            out.push_back(perm);
        } while (std::next_permutation(perm.begin(), perm.end()));
        return out;
    }();
    switch (kind) {
        case WorldKind::mario: return mario;
        case WorldKind::attrib: return attrib;
        case WorldKind::shapes: break;
    }
    throw ConfigError("domain_cases: shapes world has no induction task");
}

const char* rule_class_name(RuleClass c) {
    switch (c) {
        case RuleClass::correct: return "correct";
        case RuleClass::less_informative: return "less_informative";
        case RuleClass::wrong: return "wrong";
    }
    return "wrong";
}

namespace {

std::vector<bool> entailed_set(const std::vector<logic::Clause>& hypothesis, WorldKind kind) {
    const auto& cases = domain_cases(kind);
    std::vector<bool> out(cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i) {
        logic::FactSet facts;
        append_case_facts(kind, cases[i], "d", facts);
        mil::Goal goal = case_goal(kind, "d", cases[i].size());
        logic::QueryEnv env;
        env.program = &world_support(kind);
        env.facts = &facts;
        env.extra_clauses = &hypothesis;
        out[i] = logic::entailed_within(env, goal.atoms, 4000);
    }
    return out;
}

}  // namespace

RuleClass classify_rule(const std::vector<logic::Clause>& hypothesis, WorldKind kind) {
    std::vector<bool> mine = entailed_set(hypothesis, kind);
    std::vector<bool> ref = entailed_set(reference_rule(kind).clauses, kind);
    bool contains_ref = true, equals = true, strictly_more = false;
    for (std::size_t i = 0; i < mine.size(); ++i) {
        if (mine[i] != ref[i]) equals = false;
        if (ref[i] && !mine[i]) contains_ref = false;
        if (mine[i] && !ref[i]) strictly_more = true;
    }
    if (equals) return RuleClass::correct;
    if (contains_ref && strictly_more) return RuleClass::less_informative;
    return RuleClass::wrong;
}

std::vector<std::vector<std::size_t>> successor_values(WorldKind kind,
                                                       const std::vector<std::size_t>& current) {
    std::vector<std::vector<std::size_t>> out;
    switch (kind) {
        case WorldKind::mario: {
            std::size_t c = current.at(0);
            // preference order: right, up, left, down
            if (cell_col(c) < 2) out.push_back({c + 1});
            if (cell_row(c) > 0) out.push_back({c - 3});
            if (cell_col(c) > 0) out.push_back({c - 1});
            if (cell_row(c) < 2) out.push_back({c + 3});
            return out;
        }
        case WorldKind::attrib: {
            // age descending then gender descending
            for (int a = 2; a >= 0; --a)
                for (int g = 1; g >= 0; --g)
                    out.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(g)});
            return out;
        }
        case WorldKind::shapes: {
            for (std::size_t sh = 0; sh < 3; ++sh)
                for (std::size_t sc = 0; sc < 3; ++sc)
                    for (std::size_t o = 0; o < 4; ++o) out.push_back({sh, sc, o});
            return out;
        }
    }
    return out;
}

bool at_terminal(WorldKind kind, const std::vector<std::size_t>& current) {
    switch (kind) {
        case WorldKind::mario: return current.at(0) == 2;
        case WorldKind::attrib: return false;
        case WorldKind::shapes: return false;
    }
    return false;
}

}  // namespace abdgen::data
