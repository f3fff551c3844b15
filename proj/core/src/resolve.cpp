#include <sstream>

#include "fex/program_model.hpp"

namespace fex {

std::set<int> Resolution::all() const {
    std::set<int> out = reaching;
    out.insert(declaration.begin(), declaration.end());
    return out;
}

namespace {

// A strong definition in `def_block` kills earlier ones for a use in
// `use_block` when it executes on every path to the use: its block, or a
// block reached from it through unconditional compound/do bodies, encloses
// the use.
bool always_precedes(const ProgramModel& m, int def_block, int use_block) {
    int b = def_block;
    while (true) {
        if (m.is_ancestor_block(b, use_block)) return true;
        if (b < 0) return false;
        const Block& blk = m.blocks[static_cast<std::size_t>(b)];
        if (blk.kind != BlockKind::compound && blk.kind != BlockKind::do_body) return false;
        b = blk.parent;
    }
}

const FunctionDef* enclosing_function(const ProgramModel& m, int stmt) {
    const Statement& s = m.statements[static_cast<std::size_t>(stmt)];
    if (s.function.empty()) return nullptr;
    for (const auto& f : m.functions)
        if (f.file == s.file && f.first_stmt <= stmt && stmt <= f.last_stmt) return &f;
    return nullptr;
}

}  // namespace

Resolution resolve_definitions(const ProgramModel& m, int stmt, std::string_view var) {
    Resolution r;
    const Statement& use = m.statements[static_cast<std::size_t>(stmt)];
    const FunctionDef* fn = enclosing_function(m, stmt);

    if (fn) {
        bool killed = false;
        for (int t = stmt - 1; t >= fn->first_stmt && !killed; --t) {
            const Statement& def = m.statements[static_cast<std::size_t>(t)];
            if (!def.defines(var)) continue;
            r.reaching.insert(t);
            if (def.strongly_defines(var) && always_precedes(m, def.block, use.block)) killed = true;
        }
        // Loop-carried definitions: writes at or after the use inside an
        // enclosing loop, or inside the loop a header controls (its condition
        // runs again).
        std::vector<int> loops;
        for (int b = use.block; b >= 0; b = m.blocks[static_cast<std::size_t>(b)].parent) loops.push_back(b);
        loops.insert(loops.end(), use.controls.begin(), use.controls.end());
        for (int b : loops) {
            const Block& loop = m.blocks[static_cast<std::size_t>(b)];
            if (loop.kind != BlockKind::loop_body && loop.kind != BlockKind::do_body) continue;
            for (int t = stmt; t <= fn->last_stmt; ++t) {
                const Statement& def = m.statements[static_cast<std::size_t>(t)];
                if (def.defines(var) && m.is_ancestor_block(b, def.block)) r.reaching.insert(t);
            }
            for (int h : {loop.controlling_stmt,
                          loop.controlling_stmt >= 0
                              ? m.statements[static_cast<std::size_t>(loop.controlling_stmt)].partner
                              : -1}) {
                if (h >= 0 && m.statements[static_cast<std::size_t>(h)].defines(var))
                    r.reaching.insert(h);
            }
        }
        for (int t = stmt - 1; t >= fn->first_stmt; --t) {
            const Statement& decl = m.statements[static_cast<std::size_t>(t)];
            if (!decl.declares(var)) continue;
            if (t == fn->header_stmt || m.is_ancestor_block(decl.block, use.block)) {
                r.declaration.insert(t);
                break;
            }
        }
    }

    if (r.declaration.empty()) {
        if (auto it = m.globals.find(std::string(var)); it != m.globals.end())
            for (int g : it->second)
                if (g != stmt) r.declaration.insert(g);
    }
    r.external = r.reaching.empty() && r.declaration.empty();
    return r;
}

namespace {

void join(std::ostream& out, const char* key, const std::vector<std::string>& items) {
    if (items.empty()) return;
    out << ' ' << key << '=';
    for (std::size_t i = 0; i < items.size(); ++i) out << (i ? "," : "") << items[i];
}

void join_ids(std::ostream& out, const char* key, const std::vector<int>& items) {
    if (items.empty()) return;
    out << ' ' << key << '=';
    for (std::size_t i = 0; i < items.size(); ++i) out << (i ? "," : "") << items[i];
}

const char* jump_name(JumpKind k) {
    switch (k) {
        case JumpKind::return_: return "return";
        case JumpKind::break_: return "break";
        case JumpKind::continue_: return "continue";
        case JumpKind::goto_: return "goto";
    }
    return "return";
}

}  // namespace

std::string dump_model(const ProgramModel& m) {
    std::ostringstream out;
    out << "FEXP 1\n";
    out << "statements " << m.statements.size() << '\n';
    for (const auto& s : m.statements) {
        out << s.id << ' ' << s.file << ' ' << s.lines.first << '-' << s.lines.last << ' ' << to_string(s.kind)
            << " block=" << s.block;
        if (!s.function.empty()) out << " fn=" << s.function;
        join(out, "defs", s.var_defs);
        join(out, "strong", s.strong_defs);
        join(out, "uses", s.var_uses);
        join(out, "declares", s.declared);
        join(out, "callees", s.callees);
        join(out, "prototypes", s.prototypes);
        join_ids(out, "opens", s.opens);
        join_ids(out, "closes", s.closes);
        join_ids(out, "controls", s.controls);
        if (!s.jumps.empty()) {
            std::vector<std::string> j;
            for (const auto& jump : s.jumps) j.push_back(jump_name(jump.kind));
            join(out, "jumps", j);
        }
        if (!s.label.empty()) out << " label=" << s.label;
        if (s.partner >= 0) out << " partner=" << s.partner;
        if (s.opaque) out << " opaque";
        out << '\n';
    }
    out << "blocks " << m.blocks.size() << '\n';
    for (const auto& b : m.blocks)
        out << b.id << ' ' << to_string(b.kind) << " parent=" << b.parent << " open=" << b.open_stmt
            << " close=" << b.close_stmt << " control=" << b.controlling_stmt << (b.braced ? "" : " braceless")
            << '\n';
    out << "functions " << m.functions.size() << '\n';
    for (const auto& f : m.functions) {
        out << f.name << ' ' << f.file << " header=" << f.header_stmt << " body=" << f.body_block;
        join(out, "params", f.params);
        join_ids(out, "returns", f.return_sites);
        join_ids(out, "prototypes", f.declaration_sites);
        out << '\n';
    }
    std::vector<std::string> ext(m.externals.begin(), m.externals.end());
    out << "externals";
    for (const auto& e : ext) out << ' ' << e;
    out << "\nend\n";
    return out.str();
}

}  // namespace fex
