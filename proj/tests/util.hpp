#pragma once

#include <string>

#include "nabla/parser.hpp"

namespace testutil {

/// Clauses and #level/#table declarations of `text`; other directives are ignored.
inline void load(nabla::Program& p, const std::string& text) {
  for (const auto& d : nabla::parse_file(text, "<test>").declarations) {
    if (const auto* c = std::get_if<nabla::Clause>(&d)) {
      p.add_clause(*c);
      continue;
    }
    const auto& dir = std::get<nabla::Directive>(d);
    if (dir.kind == nabla::Directive::Kind::Level) p.declare_level(dir.pred, dir.level);
    if (dir.kind == nabla::Directive::Kind::Table) p.declare_table(dir.pred, dir.mode);
  }
  p.finalize();
}

}  // namespace testutil
