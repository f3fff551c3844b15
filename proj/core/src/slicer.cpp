#include "fex/slicer.hpp"

#include <algorithm>
#include <cstdio>

namespace fex {

const char* to_string(Origin o) {
    switch (o) {
        case Origin::seed: return "seed";
        case Origin::data_dep: return "data-dep";
        case Origin::call_def: return "call-def";
        case Origin::return_flow: return "return-flow";
        case Origin::block_completion: return "block-completion";
        case Origin::jump_completion: return "jump-completion";
        case Origin::declaration_pull: return "declaration-pull";
    }
    return "seed";
}

std::optional<Origin> parse_origin(std::string_view s) {
    for (Origin o : {Origin::seed, Origin::data_dep, Origin::call_def, Origin::return_flow, Origin::block_completion,
                     Origin::jump_completion, Origin::declaration_pull})
        if (s == to_string(o)) return o;
    return std::nullopt;
}

std::size_t FeatureSlice::line_count() const {
    std::size_t n = 0;
    for (const auto& [file, ls] : lines) n += ls.size();
    return n;
}

namespace {

const Statement& at(const ProgramModel& m, int id) { return m.statements[static_cast<std::size_t>(id)]; }
const Block& block_at(const ProgramModel& m, int id) { return m.blocks[static_cast<std::size_t>(id)]; }

class Closure {
public:
    Closure(const ProgramModel& m, SliceState& st, int limit) : m_(m), st_(st), limit_(limit) {
        fn_of_.resize(m.statements.size(), -1);
        for (std::size_t i = 0; i < m.functions.size(); ++i) {
            const auto& f = m.functions[i];
            for (int s = f.first_stmt; s >= 0 && s <= f.last_stmt; ++s)
                fn_of_[static_cast<std::size_t>(s)] = static_cast<int>(i);
        }
        fn_relevant_.assign(m.functions.size(), 0);
        for (const auto& [s, mark] : st_.relevant) {
            note_relevant(s);
            if (!st_.processed.count(s)) queue_.insert({mark.depth, s});
        }
    }

    bool mark(int s, Origin origin, int depth) {
        if (s < 0) return false;
        auto it = st_.relevant.find(s);
        if (it == st_.relevant.end()) {
            st_.relevant.emplace(s, Mark{origin, depth});
            note_relevant(s);
            queue_.insert({depth, s});
            return true;
        }
        if (depth < it->second.depth) {
            queue_.erase({it->second.depth, s});
            it->second.depth = depth;
            st_.processed.erase(s);
            queue_.insert({depth, s});
            return true;
        }
        return false;
    }

    bool drain() {
        bool changed = false;
        while (!queue_.empty()) {
            const auto [depth, s] = *queue_.begin();
            queue_.erase(queue_.begin());
            process(s, depth);
            changed = true;
        }
        return changed;
    }

    bool return_sweep() {
        bool changed = false;
        std::vector<std::pair<int, int>> returns;
        for (const auto& [s, mark] : st_.relevant)
            if (has_jump(at(m_, s), JumpKind::return_)) returns.emplace_back(s, mark.depth);
        for (const auto& [r, depth] : returns) changed |= return_flow(r, depth);
        return changed;
    }

    bool declaration_pull() {
        bool changed = false;
        std::set<std::string> files;
        for (const auto& [s, mark] : st_.relevant) files.insert(at(m_, s).file);
        for (const auto& f : m_.functions) {
            auto it = st_.relevant.find(f.header_stmt);
            if (it == st_.relevant.end()) continue;
            for (int p : f.declaration_sites) changed |= mark(p, Origin::declaration_pull, it->second.depth);
        }
        for (const auto& s : m_.statements)
            if (s.directive == DirectiveKind::include && files.count(s.file))
                changed |= mark(s.id, Origin::declaration_pull, 0);
        return changed;
    }

    bool complete() {
        bool changed = false;
        bool again = true;
        while (again) {
            again = false;
            const std::vector<std::pair<int, Mark>> snapshot(st_.relevant.begin(), st_.relevant.end());
            for (const auto& [s, mark] : snapshot) again |= complete_one(s, mark.depth);
            again |= jump_completion();
            changed |= again;
        }
        return changed;
    }

private:
    static bool has_jump(const Statement& s, JumpKind k) {
        return std::any_of(s.jumps.begin(), s.jumps.end(), [k](const Jump& j) { return j.kind == k; });
    }

    void note_relevant(int s) {
        const int f = fn_of_[static_cast<std::size_t>(s)];
        if (f >= 0) ++fn_relevant_[static_cast<std::size_t>(f)];
    }

    void process(int s, int depth) {
        const Statement& stmt = at(m_, s);
        for (const auto& var : stmt.var_uses) {
            const Resolution r = resolve_definitions(m_, s, var);
            if (r.external) st_.externals.insert(var);
            for (int d : r.all()) mark(d, Origin::data_dep, depth);
        }
        for (const auto& call : stmt.calls) {
            if (call.function < 0) {
                // Function pointers and function-like macros resolve like variables.
                const Resolution r = resolve_definitions(m_, s, call.callee);
                if (r.external) st_.externals.insert(call.callee);
                for (int d : r.all()) mark(d, Origin::data_dep, depth);
                continue;
            }
            if (depth + 1 > limit_) continue;
            const auto& f = m_.functions[static_cast<std::size_t>(call.function)];
            for (int b = f.first_stmt; b >= 0 && b <= f.last_stmt; ++b) mark(b, Origin::call_def, depth + 1);
        }
        if (has_jump(stmt, JumpKind::return_)) return_flow(s, depth);
        st_.processed.insert(s);
    }

    // Call sites that consume the value returned by `ret`'s function, in
    // functions that already take part in the slice.
    bool return_flow(int ret, int depth) {
        if (depth + 1 > limit_) return false;
        const int f = fn_of_[static_cast<std::size_t>(ret)];
        if (f < 0) return false;
        bool changed = false;
        for (const auto& e : m_.call_edges) {
            if (e.function != f || !e.consumes_value) continue;
            const int caller_fn = fn_of_[static_cast<std::size_t>(e.caller_stmt)];
            const bool participates =
                caller_fn >= 0 ? fn_relevant_[static_cast<std::size_t>(caller_fn)] > 0 : false;
            if (participates) changed |= mark(e.caller_stmt, Origin::return_flow, depth + 1);
        }
        return changed;
    }

    bool mark_block_frame(int b, int depth) {
        const Block& blk = block_at(m_, b);
        bool changed = false;
        changed |= mark(blk.open_stmt, Origin::block_completion, depth);
        changed |= mark(blk.close_stmt, Origin::block_completion, depth);
        changed |= mark(blk.controlling_stmt, Origin::block_completion, depth);
        if (!blk.braced)
            for (int s : blk.statements) changed |= mark(s, Origin::block_completion, depth);
        return changed;
    }

    bool complete_one(int s, int depth) {
        const Statement& stmt = at(m_, s);
        bool changed = false;
        for (int b = stmt.block; b >= 0; b = block_at(m_, b).parent) {
            const Block& blk = block_at(m_, b);
            changed |= mark(blk.open_stmt, Origin::block_completion, depth);
            changed |= mark(blk.close_stmt, Origin::block_completion, depth);
            changed |= mark(blk.controlling_stmt, Origin::block_completion, depth);
        }
        for (int b : stmt.opens) changed |= mark_block_frame(b, depth);
        for (int b : stmt.controls) changed |= mark_block_frame(b, depth);
        for (int b : stmt.closes) changed |= mark_block_frame(b, depth);
        if (stmt.partner >= 0) changed |= mark(stmt.partner, Origin::block_completion, depth);

        for (const auto& j : stmt.jumps) {
            if (j.kind != JumpKind::goto_ || j.label.empty()) continue;
            const int f = fn_of_[static_cast<std::size_t>(s)];
            if (f < 0) continue;
            const auto& fn = m_.functions[static_cast<std::size_t>(f)];
            for (int t = fn.first_stmt; t <= fn.last_stmt; ++t)
                if (at(m_, t).label == j.label) changed |= mark(t, Origin::jump_completion, depth);
        }

        if (stmt.directive_group >= 0) changed |= mark_group(stmt.directive_group, depth);
        for (std::size_t g = 0; g < m_.directive_groups.size(); ++g) {
            const auto& grp = m_.directive_groups[g];
            if (grp.file != stmt.file || grp.members.size() < 2) continue;
            if (grp.members.front() < s && s < grp.members.back()) changed |= mark_group(static_cast<int>(g), depth);
        }

        if (!stmt.is_structural()) changed |= complete_switch(s, depth);
        return changed;
    }

    bool mark_group(int g, int depth) {
        bool changed = false;
        for (int s : m_.directive_groups[static_cast<std::size_t>(g)].members)
            changed |= mark(s, Origin::block_completion, depth);
        return changed;
    }

    // Inside a switch: the governing case label and the break ending the arm.
    bool complete_switch(int s, int depth) {
        const Statement& stmt = at(m_, s);
        int sw = -1;
        for (int b = stmt.block; b >= 0; b = block_at(m_, b).parent) {
            const Block& blk = block_at(m_, b);
            if (blk.kind == BlockKind::loop_body || blk.kind == BlockKind::do_body) return false;
            if (blk.kind == BlockKind::switch_body) {
                sw = b;
                break;
            }
        }
        if (sw < 0) return false;
        bool changed = false;
        if (stmt.kind != StatementKind::case_label || !stmt.label.empty()) {
            for (int t = s - 1; t >= 0; --t) {
                const Statement& c = at(m_, t);
                if (c.file != stmt.file || !m_.is_ancestor_block(sw, c.block)) break;
                if (c.block == sw && c.kind == StatementKind::case_label && c.label.empty()) {
                    changed |= mark(t, Origin::block_completion, depth);
                    break;
                }
            }
        }
        for (int t = s + 1; t < static_cast<int>(m_.statements.size()); ++t) {
            const Statement& c = at(m_, t);
            if (c.file != stmt.file || !m_.is_ancestor_block(sw, c.block)) break;
            const bool ends_arm = std::any_of(c.jumps.begin(), c.jumps.end(), [&](const Jump& j) {
                return (j.kind == JumpKind::break_ && j.target_block == sw) || j.kind == JumpKind::return_;
            });
            if (ends_arm) {
                changed |= mark(t, Origin::block_completion, depth);
                break;
            }
        }
        return changed;
    }

    // Depth of the first relevant non-structural statement in (from, to], or -1.
    int relevant_after(int from, int to, int within_block) const {
        for (auto it = st_.relevant.upper_bound(from); it != st_.relevant.end() && it->first <= to; ++it) {
            const Statement& s = at(m_, it->first);
            if (s.is_structural()) continue;
            if (within_block >= 0 && !m_.is_ancestor_block(within_block, s.block)) continue;
            return it->second.depth;
        }
        return -1;
    }

    // Unconditional jumps that decide whether later relevant code runs.
    bool jump_completion() {
        bool changed = false;
        for (const auto& s : m_.statements) {
            if (s.jumps.empty() || st_.relevant.count(s.id)) continue;
            const int f = fn_of_[static_cast<std::size_t>(s.id)];
            if (f < 0 || fn_relevant_[static_cast<std::size_t>(f)] == 0) continue;
            const auto& fn = m_.functions[static_cast<std::size_t>(f)];
            int depth = -1;
            for (const auto& j : s.jumps) {
                if (j.kind == JumpKind::return_ || j.kind == JumpKind::goto_) {
                    depth = relevant_after(s.id, fn.last_stmt, -1);
                } else if (j.target_block >= 0) {
                    const Block& target = block_at(m_, j.target_block);
                    depth = relevant_after(s.id, fn.last_stmt, j.target_block);
                    const bool loop = target.kind == BlockKind::loop_body || target.kind == BlockKind::do_body;
                    if (depth < 0 && loop) {
                        auto it = st_.relevant.find(target.controlling_stmt);
                        if (it != st_.relevant.end()) depth = it->second.depth;
                    }
                }
                if (depth >= 0) break;
            }
            if (depth >= 0) changed |= mark(s.id, Origin::jump_completion, depth);
        }
        return changed;
    }

    const ProgramModel& m_;
    SliceState& st_;
    int limit_;
    std::set<std::pair<int, int>> queue_;  // (depth, statement)
    std::vector<int> fn_of_;
    std::vector<int> fn_relevant_;
};

std::string format_threshold(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

}  // namespace

SliceState seed_state(const ProgramModel& model, const std::vector<SeedLocation>& seeds, Diagnostics* diagnostics) {
    SliceState st;
    for (const auto& loc : seeds) {
        if (loc.context == lex::Context::comment) continue;
        const auto s = model.statement_at(loc.file, loc.line);
        if (!s) {
            if (diagnostics)
                diagnostics->push_back({loc.file, loc.line, "seed location lies outside every statement; skipped"});
            continue;
        }
        st.relevant.emplace(*s, Mark{Origin::seed, 0});
    }
    return st;
}

void close_slice(const ProgramModel& model, SliceState& state, int ipd_limit) {
    if (ipd_limit < 0) throw usage_error("ipd limit must be >= 0");
    Closure c(model, state, ipd_limit);
    bool changed = true;
    while (changed) {
        changed = false;
        changed |= c.drain();
        changed |= c.return_sweep();
        changed |= c.complete();
        if (!changed) changed |= c.declaration_pull();
    }
}

bool complete_blocks(const ProgramModel& model, SliceState& state) {
    Closure c(model, state, 0);
    return c.complete();
}

std::map<std::string, std::vector<int>> slice_lines(const ProgramModel& model, const SliceState& state) {
    std::map<std::string, std::set<int>> sets;
    for (const auto& [id, mark] : state.relevant) {
        const Statement& s = at(model, id);
        auto& set = sets[s.file];
        for (int l = s.lines.first; l <= s.lines.last; ++l) set.insert(l);
    }
    std::map<std::string, std::vector<int>> out;
    for (auto& [file, set] : sets) {
        const ModelFile* mf = model.file(file);
        std::set<int> extra;
        if (mf) {
            for (int l : set) {
                int k = l;
                while (k >= 1 && k <= static_cast<int>(mf->line_classes.size()) &&
                       mf->line_classes[static_cast<std::size_t>(k - 1)].ends_in_comment &&
                       k + 1 <= static_cast<int>(mf->lines.size()))
                    extra.insert(++k);
            }
        }
        set.insert(extra.begin(), extra.end());
        out[file] = std::vector<int>(set.begin(), set.end());
    }
    return out;
}

std::map<std::string, std::string> render_slice(const ProgramModel& model, const SliceState& state,
                                                const Provenance& provenance) {
    std::map<std::string, std::string> out;
    std::string terms;
    for (std::size_t i = 0; i < provenance.terms.size(); ++i) terms += (i ? "," : "") + provenance.terms[i];
    const std::string header = "/* fex slice: terms=" + terms + " threshold=" +
                               format_threshold(provenance.threshold) +
                               " ipd=" + std::to_string(provenance.ipd_limit) + " */\n";
    for (const auto& [file, lines] : slice_lines(model, state)) {
        const ModelFile* mf = model.file(file);
        if (!mf || lines.empty()) continue;
        std::string text = header;
        for (int l : lines) {
            if (l >= 1 && l <= static_cast<int>(mf->lines.size())) text += mf->lines[static_cast<std::size_t>(l - 1)];
            text += '\n';
        }
        out[file] = std::move(text);
    }
    return out;
}

FeatureSlice extract_feature(const ProgramModel& model, const std::vector<SeedLocation>& seeds,
                             const Provenance& provenance) {
    FeatureSlice slice;
    slice.state = seed_state(model, seeds, &slice.diagnostics);
    if (slice.state.relevant.empty()) {
        slice.diagnostics.push_back({"", 0, "no seed statements; the slice is empty"});
        return slice;
    }
    close_slice(model, slice.state, provenance.ipd_limit);
    slice.lines = slice_lines(model, slice.state);
    for (const auto& [file, lines] : slice.lines) {
        auto& origins = slice.line_origins[file];
        const ModelFile* mf = model.file(file);
        LineOrigin last{};
        for (int l : lines) {
            const int s = mf ? mf->statement_at_line[static_cast<std::size_t>(l - 1)] : -1;
            auto it = s >= 0 ? slice.state.relevant.find(s) : slice.state.relevant.end();
            if (it != slice.state.relevant.end()) last = {it->second.origin, it->second.depth};
            origins[l] = last;  // comment continuation lines inherit from the line above
        }
    }
    slice.rendered = render_slice(model, slice.state, provenance);
    return slice;
}

}  // namespace fex
