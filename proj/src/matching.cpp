#include "mwsim/matching.hpp"

#include <algorithm>
#include <stdexcept>

// Primal-dual blossom algorithm after Galil, "Efficient algorithms for
// finding maximum matching in graphs" (1986), in the array formulation used
// by van Rantwijk's reference implementation. Vertices are 0..n-1, blossoms
// n..2n-1. Edge k has endpoints 2k and 2k+1; endpoint p belongs to vertex
// endpoint_[p], and p^1 is the other end of the same edge.

namespace mwsim {

namespace {

class BlossomMatcher {
public:
    BlossomMatcher(int n, std::span<const WeightedEdge> edges) : n_(n), edges_(edges.begin(), edges.end()) {}

    std::vector<int> solve();

private:
    double slack(int k) const
    {
        const auto& e = edges_[k];
        return dual_[e.u] + dual_[e.v] - 2.0 * e.weight;
    }

    void leaves(int b, std::vector<int>& out) const
    {
        if (b < n_) {
            out.push_back(b);
            return;
        }
        for (int t : childs_[b]) leaves(t, out);
    }

    std::vector<int> leaves(int b) const
    {
        std::vector<int> out;
        leaves(b, out);
        return out;
    }

    void assign_label(int w, int t, int p);
    int scan_blossom(int v, int w);
    void add_blossom(int base, int k);
    void expand_blossom(int b, bool endstage);
    void augment_blossom(int b, int v);
    void augment_matching(int k);

    int n_;
    std::vector<WeightedEdge> edges_;
    std::vector<int> endpoint_;
    std::vector<std::vector<int>> neighbend_;
    std::vector<int> mate_;
    std::vector<int> label_;
    std::vector<int> labelend_;
    std::vector<int> inblossom_;
    std::vector<int> parent_;
    std::vector<std::vector<int>> childs_;
    std::vector<int> base_;
    std::vector<std::vector<int>> endps_;
    std::vector<int> bestedge_;
    std::vector<std::vector<int>> blossombestedges_;
    std::vector<bool> has_bestedges_;
    std::vector<int> unused_;
    std::vector<double> dual_;
    std::vector<bool> allowedge_;
    std::vector<int> queue_;
};

void BlossomMatcher::assign_label(int w, int t, int p)
{
    const int b = inblossom_[w];
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
        leaves(b, queue_);
    } else if (t == 2) {
        const int base = base_[b];
        assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
    }
}

int BlossomMatcher::scan_blossom(int v, int w)
{
    std::vector<int> path;
    int base = -1;
    while (v != -1 || w != -1) {
        int b = inblossom_[v];
        if (label_[b] & 4) {
            base = base_[b];
            break;
        }
        path.push_back(b);
        label_[b] = 5;
        if (labelend_[b] == -1) {
            v = -1;
        } else {
            v = endpoint_[labelend_[b]];
            b = inblossom_[v];
            v = endpoint_[labelend_[b]];
        }
        if (w != -1) std::swap(v, w);
    }
    for (int b : path) label_[b] = 1;
    return base;
}

void BlossomMatcher::add_blossom(int base, int k)
{
    int v = edges_[k].u;
    int w = edges_[k].v;
    const int bb = inblossom_[base];
    int bv = inblossom_[v];
    int bw = inblossom_[w];
    const int b = unused_.back();
    unused_.pop_back();
    base_[b] = base;
    parent_[b] = -1;
    parent_[bb] = b;
    auto& path = childs_[b];
    auto& endps = endps_[b];
    path.clear();
    endps.clear();
    while (bv != bb) {
        parent_[bv] = b;
        path.push_back(bv);
        endps.push_back(labelend_[bv]);
        v = endpoint_[labelend_[bv]];
        bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
        parent_[bw] = b;
        path.push_back(bw);
        endps.push_back(labelend_[bw] ^ 1);
        w = endpoint_[labelend_[bw]];
        bw = inblossom_[w];
    }
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dual_[b] = 0.0;
    for (int leaf : leaves(b)) {
        if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
        inblossom_[leaf] = b;
    }

    std::vector<int> bestedgeto(static_cast<std::size_t>(2 * n_), -1);
    for (int sub : path) {
        std::vector<std::vector<int>> nblists;
        if (!has_bestedges_[sub]) {
            for (int leaf : leaves(sub)) {
                std::vector<int> lst;
                for (int p : neighbend_[leaf]) lst.push_back(p / 2);
                nblists.push_back(std::move(lst));
            }
        } else {
            nblists.push_back(blossombestedges_[sub]);
        }
        for (const auto& lst : nblists) {
            for (int kk : lst) {
                int i = edges_[kk].u;
                int j = edges_[kk].v;
                if (inblossom_[j] == b) std::swap(i, j);
                const int bj = inblossom_[j];
                if (bj != b && label_[bj] == 1 && (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj])))
                    bestedgeto[bj] = kk;
            }
        }
        blossombestedges_[sub].clear();
        has_bestedges_[sub] = false;
        bestedge_[sub] = -1;
    }
    blossombestedges_[b].clear();
    for (int kk : bestedgeto)
        if (kk != -1) blossombestedges_[b].push_back(kk);
    has_bestedges_[b] = true;
    bestedge_[b] = -1;
    for (int kk : blossombestedges_[b])
        if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b])) bestedge_[b] = kk;
}

void BlossomMatcher::expand_blossom(int b, bool endstage)
{
    for (int s : std::vector<int>(childs_[b])) {
        parent_[s] = -1;
        if (s < n_) {
            inblossom_[s] = s;
        } else if (endstage && dual_[s] == 0.0) {
            expand_blossom(s, endstage);
        } else {
            for (int leaf : leaves(s)) inblossom_[leaf] = s;
        }
    }
    if (!endstage && label_[b] == 2) {
        const auto& ch = childs_[b];
        const int len = static_cast<int>(ch.size());
        const int entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
        int j = static_cast<int>(std::find(ch.begin(), ch.end(), entrychild) - ch.begin());
        int jstep;
        int endptrick;
        if (j & 1) {
            j -= len;
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        auto at = [len](const std::vector<int>& xs, int idx) { return xs[static_cast<std::size_t>(((idx % len) + len) % len)]; };
        int p = labelend_[b];
        while (j != 0) {
            label_[endpoint_[p ^ 1]] = 0;
            label_[endpoint_[at(endps_[b], j - endptrick) ^ endptrick ^ 1]] = 0;
            assign_label(endpoint_[p ^ 1], 2, p);
            allowedge_[at(endps_[b], j - endptrick) / 2] = true;
            j += jstep;
            p = at(endps_[b], j - endptrick) ^ endptrick;
            allowedge_[p / 2] = true;
            j += jstep;
        }
        int bv = at(ch, j);
        label_[endpoint_[p ^ 1]] = label_[bv] = 2;
        labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
        bestedge_[bv] = -1;
        j += jstep;
        while (at(ch, j) != entrychild) {
            bv = at(ch, j);
            if (label_[bv] == 1) {
                j += jstep;
                continue;
            }
            int labelled = -1;
            for (int leaf : leaves(bv)) {
                if (label_[leaf] != 0) {
                    labelled = leaf;
                    break;
                }
            }
            if (labelled != -1) {
                label_[labelled] = 0;
                label_[endpoint_[mate_[base_[bv]]]] = 0;
                assign_label(labelled, 2, labelend_[labelled]);
            }
            j += jstep;
        }
    }
    label_[b] = labelend_[b] = -1;
    childs_[b].clear();
    endps_[b].clear();
    base_[b] = -1;
    blossombestedges_[b].clear();
    has_bestedges_[b] = false;
    bestedge_[b] = -1;
    unused_.push_back(b);
}

void BlossomMatcher::augment_blossom(int b, int v)
{
    int t = v;
    while (parent_[t] != b) t = parent_[t];
    if (t >= n_) augment_blossom(t, v);
    auto& ch = childs_[b];
    auto& ep = endps_[b];
    const int len = static_cast<int>(ch.size());
    const int i = static_cast<int>(std::find(ch.begin(), ch.end(), t) - ch.begin());
    int j = i;
    int jstep;
    int endptrick;
    if (i & 1) {
        j -= len;
        jstep = 1;
        endptrick = 0;
    } else {
        jstep = -1;
        endptrick = 1;
    }
    auto wrap = [len](int idx) { return static_cast<std::size_t>(((idx % len) + len) % len); };
    while (j != 0) {
        j += jstep;
        t = ch[wrap(j)];
        const int p = ep[wrap(j - endptrick)] ^ endptrick;
        if (t >= n_) augment_blossom(t, endpoint_[p]);
        j += jstep;
        t = ch[wrap(j)];
        if (t >= n_) augment_blossom(t, endpoint_[p ^ 1]);
        mate_[endpoint_[p]] = p ^ 1;
        mate_[endpoint_[p ^ 1]] = p;
    }
    std::rotate(ch.begin(), ch.begin() + i, ch.end());
    std::rotate(ep.begin(), ep.begin() + i, ep.end());
    base_[b] = base_[ch[0]];
}

void BlossomMatcher::augment_matching(int k)
{
    const int ends[2][2] = {{edges_[k].u, 2 * k + 1}, {edges_[k].v, 2 * k}};
    for (const auto& sp : ends) {
        int s = sp[0];
        int p = sp[1];
        while (true) {
            const int bs = inblossom_[s];
            if (bs >= n_) augment_blossom(bs, s);
            mate_[s] = p;
            if (labelend_[bs] == -1) break;
            const int t = endpoint_[labelend_[bs]];
            const int bt = inblossom_[t];
            s = endpoint_[labelend_[bt]];
            const int j = endpoint_[labelend_[bt] ^ 1];
            if (bt >= n_) augment_blossom(bt, j);
            mate_[j] = labelend_[bt];
            p = labelend_[bt] ^ 1;
        }
    }
}

std::vector<int> BlossomMatcher::solve()
{
    const int n = n_;
    const int m = static_cast<int>(edges_.size());
    std::vector<int> result(static_cast<std::size_t>(n), -1);
    if (m == 0 || n == 0) return result;

    double maxweight = 0.0;
    for (const auto& e : edges_) {
        if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n || e.u == e.v)
            throw std::invalid_argument("matching edge endpoint out of range or self-loop");
        maxweight = std::max(maxweight, e.weight);
    }

    const auto n2 = static_cast<std::size_t>(2 * n);
    endpoint_.resize(static_cast<std::size_t>(2 * m));
    neighbend_.assign(static_cast<std::size_t>(n), {});
    for (int k = 0; k < m; ++k) {
        endpoint_[2 * k] = edges_[k].u;
        endpoint_[2 * k + 1] = edges_[k].v;
        neighbend_[edges_[k].u].push_back(2 * k + 1);
        neighbend_[edges_[k].v].push_back(2 * k);
    }
    mate_.assign(static_cast<std::size_t>(n), -1);
    label_.assign(n2, 0);
    labelend_.assign(n2, -1);
    inblossom_.resize(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) inblossom_[v] = v;
    parent_.assign(n2, -1);
    childs_.assign(n2, {});
    base_.assign(n2, -1);
    for (int v = 0; v < n; ++v) base_[v] = v;
    endps_.assign(n2, {});
    bestedge_.assign(n2, -1);
    blossombestedges_.assign(n2, {});
    has_bestedges_.assign(n2, false);
    unused_.clear();
    for (int b = n; b < 2 * n; ++b) unused_.push_back(b);
    dual_.assign(n2, 0.0);
    for (int v = 0; v < n; ++v) dual_[v] = maxweight;
    allowedge_.assign(static_cast<std::size_t>(m), false);

    for (int stage = 0; stage < n; ++stage) {
        std::fill(label_.begin(), label_.end(), 0);
        std::fill(bestedge_.begin(), bestedge_.end(), -1);
        for (int b = n; b < 2 * n; ++b) {
            blossombestedges_[b].clear();
            has_bestedges_[b] = false;
        }
        std::fill(allowedge_.begin(), allowedge_.end(), false);
        queue_.clear();

        for (int v = 0; v < n; ++v)
            if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);

        bool augmented = false;
        while (true) {
            while (!queue_.empty() && !augmented) {
                const int v = queue_.back();
                queue_.pop_back();
                for (int p : neighbend_[v]) {
                    const int k = p / 2;
                    const int w = endpoint_[p];
                    if (inblossom_[v] == inblossom_[w]) continue;
                    double kslack = 0.0;
                    if (!allowedge_[k]) {
                        kslack = slack(k);
                        if (kslack <= 0.0) allowedge_[k] = true;
                    }
                    if (allowedge_[k]) {
                        if (label_[inblossom_[w]] == 0) {
                            assign_label(w, 2, p ^ 1);
                        } else if (label_[inblossom_[w]] == 1) {
                            const int base = scan_blossom(v, w);
                            if (base >= 0) {
                                add_blossom(base, k);
                            } else {
                                augment_matching(k);
                                augmented = true;
                                break;
                            }
                        } else if (label_[w] == 0) {
                            label_[w] = 2;
                            labelend_[w] = p ^ 1;
                        }
                    } else if (label_[inblossom_[w]] == 1) {
                        const int b = inblossom_[v];
                        if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
                    } else if (label_[w] == 0) {
                        if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
                    }
                }
            }
            if (augmented) break;

            // Dual adjustment. Type 1: stop (no augmenting path gains weight);
            // 2: make an S-to-free edge tight; 3: make an S-to-S edge tight;
            // 4: expand a T-blossom whose dual reached zero.
            int deltatype = 1;
            double delta = *std::min_element(dual_.begin(), dual_.begin() + n);
            int deltaedge = -1;
            int deltablossom = -1;
            for (int v = 0; v < n; ++v) {
                if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
                    const double d = slack(bestedge_[v]);
                    if (d < delta) {
                        delta = d;
                        deltatype = 2;
                        deltaedge = bestedge_[v];
                    }
                }
            }
            for (int b = 0; b < 2 * n; ++b) {
                if (parent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
                    const double d = slack(bestedge_[b]) / 2.0;
                    if (d < delta) {
                        delta = d;
                        deltatype = 3;
                        deltaedge = bestedge_[b];
                    }
                }
            }
            for (int b = n; b < 2 * n; ++b) {
                if (base_[b] >= 0 && parent_[b] == -1 && label_[b] == 2 && dual_[b] < delta) {
                    delta = dual_[b];
                    deltatype = 4;
                    deltablossom = b;
                }
            }

            for (int v = 0; v < n; ++v) {
                if (label_[inblossom_[v]] == 1)
                    dual_[v] -= delta;
                else if (label_[inblossom_[v]] == 2)
                    dual_[v] += delta;
            }
            for (int b = n; b < 2 * n; ++b) {
                if (base_[b] >= 0 && parent_[b] == -1) {
                    if (label_[b] == 1)
                        dual_[b] += delta;
                    else if (label_[b] == 2)
                        dual_[b] -= delta;
                }
            }

            if (deltatype == 1) break;
            if (deltatype == 2) {
                allowedge_[deltaedge] = true;
                int i = edges_[deltaedge].u;
                if (label_[inblossom_[i]] == 0) i = edges_[deltaedge].v;
                queue_.push_back(i);
            } else if (deltatype == 3) {
                allowedge_[deltaedge] = true;
                queue_.push_back(edges_[deltaedge].u);
            } else {
                expand_blossom(deltablossom, false);
            }
        }
        if (!augmented) break;

        for (int b = n; b < 2 * n; ++b)
            if (parent_[b] == -1 && base_[b] >= 0 && label_[b] == 1 && dual_[b] == 0.0) expand_blossom(b, true);
    }

    for (int v = 0; v < n; ++v)
        if (mate_[v] >= 0) result[v] = endpoint_[mate_[v]];
    return result;
}

}  // namespace

std::vector<int> max_weight_matching(int vertex_count, std::span<const WeightedEdge> edges)
{
    std::vector<WeightedEdge> positive;
    positive.reserve(edges.size());
    for (const auto& e : edges)
        if (e.weight > 0.0) positive.push_back(e);
    BlossomMatcher matcher(vertex_count, positive);
    return matcher.solve();
}

}  // namespace mwsim
