#include "impact/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <json.hpp>

#include "impact/error.hpp"
#include "impact/hashing.hpp"
#include "impact/parallel.hpp"
#include "impact/stopwords.hpp"

namespace impact {

namespace {

struct DomainSeed {
  const char* onsets;
  std::vector<std::string> topical;
  std::vector<std::string> high;
  std::vector<std::string> low;
};

const DomainSeed& domain_seed(std::size_t index) {
  static const DomainSeed seeds[2] = {
      {"bdkptvz",
       {"algorithm", "compiler", "kernel", "protocol", "graph", "parser", "cache", "thread", "query", "latency",
        "scheduler", "tensor", "router", "bytecode", "bandwidth"},
       {"benchmark", "speedup"},
       {"quantum", "conjecture"}},
      {"fghlmnrs",
       {"patient", "clinical", "dose", "tumor", "cardiac", "therapy", "lesion", "serum", "plasma", "biopsy", "insulin",
        "fracture", "antibody", "renal", "dermal"},
       {"randomized", "cohort"},
       {"anecdotal", "homeopathy"}},
  };
  return seeds[index];
}

constexpr const char* kFiller[] = {"the", "of", "and", "in", "to", "we", "a", "is", "for", "with",
                                   "that", "this", "on", "are", "by", "from", "as", "be", "these", "our"};

std::string pseudo_word(Rng& rng, const char* onsets) {
  static constexpr const char* kVowels = "aeiou";
  static constexpr const char* kCodas[] = {"", "", "", "n", "l", "r", "s", "x"};
  const std::size_t n_onsets = std::char_traits<char>::length(onsets);
  const int syllables = 2 + static_cast<int>(rng.below(2));
  std::string w;
  for (int s = 0; s < syllables; ++s) {
    w += onsets[rng.below(n_onsets)];
    w += kVowels[rng.below(5)];
  }
  w += kCodas[rng.below(8)];
  return w;
}

}  // namespace

std::vector<DomainLexicon> synthetic_lexicons(const SyntheticOptions& options) {
  if (options.domains.size() != 2 || options.domains[0] == options.domains[1]) {
    throw ValidationError("synthetic corpus needs exactly two distinct domain names");
  }
  std::vector<DomainLexicon> out;
  std::set<std::string> taken;
  for (std::size_t d = 0; d < 2; ++d) {
    const auto& seed = domain_seed(d);
    for (const auto& w : seed.topical) taken.insert(w);
    for (const auto& w : seed.high) taken.insert(w);
    for (const auto& w : seed.low) taken.insert(w);
  }
  for (std::size_t d = 0; d < 2; ++d) {
    const auto& seed = domain_seed(d);
    DomainLexicon lex;
    lex.domain = options.domains[d];
    lex.high_tokens = seed.high;
    lex.low_tokens = seed.low;
    lex.background = seed.topical;
    Rng rng(mix_seed(options.seed, "lexicon:" + lex.domain));
    std::set<std::string> seen(seed.topical.begin(), seed.topical.end());
    while (lex.background.size() < 1200) {
      auto w = pseudo_word(rng, seed.onsets);
      if (is_stop_word(w) || taken.count(w) || !seen.insert(w).second) continue;
      lex.background.push_back(std::move(w));
    }
    out.push_back(std::move(lex));
  }
  return out;
}

std::string synthetic_text(const DomainLexicon& lexicon, bool high, Rng& rng, const SyntheticOptions& options) {
  std::vector<double> cumulative(lexicon.background.size());
  double total = 0;
  for (std::size_t r = 0; r < cumulative.size(); ++r) cumulative[r] = total += 1.0 / static_cast<double>(r + 1);

  const std::size_t length = 250 + rng.below(151);
  std::vector<std::string> words;
  words.reserve(length + 16);
  for (std::size_t i = 0; i < length; ++i) {
    const double u = rng.uniform();
    if (u < 0.3) {
      words.emplace_back(kFiller[rng.below(std::size(kFiller))]);
    } else if (u < 0.33) {
      words.push_back(std::to_string(1990 + rng.below(26)));
    } else {
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), rng.uniform() * total);
      words.push_back(lexicon.background[std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1)]);
    }
  }
  auto plant = [&](const std::vector<std::string>& tokens, double rate) {
    for (const auto& t : tokens) {
      if (!rng.bernoulli(rate)) continue;
      const auto count = 2 + rng.below(4);
      for (std::uint64_t c = 0; c < count; ++c) {
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.below(words.size() + 1)), t);
      }
    }
  };
  plant(lexicon.high_tokens, high ? options.planted_rate : options.leak_rate);
  plant(lexicon.low_tokens, high ? options.leak_rate : options.planted_rate);

  std::string text;
  bool sentence_start = true;
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::string w = words[i];
    if (sentence_start && !w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    text += w;
    sentence_start = rng.bernoulli(0.08);
    if (sentence_start) {
      text += rng.bernoulli(0.2) ? ".\n" : ". ";
    } else {
      text += rng.bernoulli(0.05) ? ", " : " ";
    }
  }
  text += '\n';
  return text;
}

namespace {

struct Canvas {
  GrayImage& img;

  void fill_rect(int x0, int y0, int x1, int y1, float v) {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, img.width);
    y1 = std::min(y1, img.height);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) img.at(x, y) = v;
    }
  }
  void frame(int x0, int y0, int x1, int y1, float v, int t = 1) {
    fill_rect(x0, y0, x1, y0 + t, v);
    fill_rect(x0, y1 - t, x1, y1, v);
    fill_rect(x0, y0, x0 + t, y1, v);
    fill_rect(x1 - t, y0, x1, y1, v);
  }
  void disk(double cx, double cy, double r, float v) {
    const int x0 = static_cast<int>(std::floor(cx - r)), x1 = static_cast<int>(std::ceil(cx + r));
    const int y0 = static_cast<int>(std::floor(cy - r)), y1 = static_cast<int>(std::ceil(cy + r));
    for (int y = std::max(y0, 0); y <= std::min(y1, img.height - 1); ++y) {
      for (int x = std::max(x0, 0); x <= std::min(x1, img.width - 1); ++x) {
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) img.at(x, y) = v;
      }
    }
  }
  void line(double xa, double ya, double xb, double yb, double r, float v) {
    const int steps = std::max(1, static_cast<int>(std::ceil(std::hypot(xb - xa, yb - ya) * 2)));
    for (int s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      disk(xa + t * (xb - xa), ya + t * (yb - ya), r, v);
    }
  }
};

constexpr float kInk = 0.12f;

// A word is a run of glyph cells 5px wide; glyph strokes vary so text lines
// have letter-scale structure rather than flat bars.
int draw_word(Canvas& c, Rng& rng, int x, int y, int height, int max_x) {
  const int chars = 2 + static_cast<int>(rng.below(8));
  const int cell = std::max(4, height * 5 / 7);
  const int t = std::max(1, height / 4);  // stroke width
  if (x + chars * cell > max_x) return -1;
  for (int i = 0; i < chars; ++i) {
    const int gx = x + i * cell;
    const int w = cell - 1;
    const int mid = y + height / 3;
    switch (rng.below(5)) {
      case 0:
        c.fill_rect(gx, y, gx + t, y + height, kInk);
        break;
      case 1:
        c.frame(gx, mid, gx + w, y + height, kInk, t);
        break;
      case 2:
        c.fill_rect(gx, mid, gx + t, y + height, kInk);
        c.fill_rect(gx + w - t, mid, gx + w, y + height, kInk);
        c.fill_rect(gx, mid, gx + w, mid + t, kInk);
        break;
      case 3:
        c.fill_rect(gx, y - height / 3, gx + t, y + height, kInk);
        c.frame(gx, mid, gx + w, y + height, kInk, t);
        break;
      default:
        c.fill_rect(gx, y + height / 2, gx + w, y + height / 2 + t, kInk);
        c.fill_rect(gx + w / 2, mid, gx + w / 2 + t, y + height, kInk);
        break;
    }
  }
  return x + chars * cell;
}

void draw_text_line(Canvas& c, Rng& rng, int x0, int x1, int y, int height, double fill = 1.0) {
  const int stop = x0 + static_cast<int>((x1 - x0) * fill);
  int x = x0;
  while (x < stop) {
    const int end = draw_word(c, rng, x, y, height, stop);
    if (end < 0) break;
    x = end + height * 4 / 7 + 1;
  }
}

void draw_plot(Canvas& c, Rng& rng, int x0, int y0, int x1, int y1) {
  c.frame(x0, y0, x1, y1, 0.2f);
  const int w = x1 - x0, h = y1 - y0;
  for (int t = 1; t < 6; ++t) {
    c.fill_rect(x0 + t * w / 6, y1 - 5, x0 + t * w / 6 + 1, y1, 0.2f);
    c.fill_rect(x0, y0 + t * h / 6, x0 + 5, y0 + t * h / 6 + 1, 0.2f);
  }
  const int curves = 1 + static_cast<int>(rng.below(3));
  for (int k = 0; k < curves; ++k) {
    const double f1 = rng.uniform(0.5, 3.0), f2 = rng.uniform(2.0, 6.0), ph = rng.uniform(0, 6.28);
    const double a2 = rng.uniform(0.0, 0.4), base = rng.uniform(0.3, 0.7);
    const float shade = static_cast<float>(0.1 + 0.2 * k);
    double px = 0, py = 0;
    for (int s = 0; s <= 40; ++s) {
      const double t = s / 40.0;
      const double v = base + 0.25 * std::sin(f1 * 6.28 * t + ph) + a2 * 0.25 * std::sin(f2 * 6.28 * t);
      const double x = x0 + 4 + t * (w - 8);
      const double y = y1 - 4 - std::clamp(v, 0.0, 1.0) * (h - 8);
      if (s > 0) c.line(px, py, x, y, 1.0, shade);
      if (s % 8 == 0) c.disk(x, y, 3.0, shade);
      px = x;
      py = y;
    }
  }
}

void draw_bars(Canvas& c, Rng& rng, int x0, int y0, int x1, int y1) {
  c.fill_rect(x0, y1 - 2, x1, y1, 0.15f);
  c.fill_rect(x0, y0, x0 + 2, y1, 0.15f);
  const int bars = 5 + static_cast<int>(rng.below(8));
  const int slot = (x1 - x0 - 6) / bars;
  for (int b = 0; b < bars; ++b) {
    const int top = y0 + static_cast<int>(rng.uniform(0.05, 0.9) * (y1 - y0));
    const int bx = x0 + 6 + b * slot;
    c.fill_rect(bx, top, bx + slot * 2 / 3, y1 - 2, static_cast<float>(rng.uniform(0.25, 0.7)));
    c.frame(bx, top, bx + slot * 2 / 3, y1 - 2, 0.1f);
  }
}

void draw_texture(Canvas& c, Rng& rng, int x0, int y0, int x1, int y1) {
  struct Bump {
    double x, y, s, a;
  };
  std::vector<Bump> bumps(6 + rng.below(6));
  for (auto& b : bumps) {
    b = {rng.uniform(x0, x1), rng.uniform(y0, y1), rng.uniform(6, 30), rng.uniform(-0.5, 0.5)};
  }
  const double fx = rng.uniform(0.05, 0.3), fy = rng.uniform(0.05, 0.3), ga = rng.uniform(0.05, 0.2);
  for (int y = std::max(y0, 0); y < std::min(y1, c.img.height); ++y) {
    for (int x = std::max(x0, 0); x < std::min(x1, c.img.width); ++x) {
      double v = 0.55 + ga * std::sin(fx * x + fy * y);
      for (const auto& b : bumps) v += b.a * std::exp(-((x - b.x) * (x - b.x) + (y - b.y) * (y - b.y)) / (2 * b.s * b.s));
      c.img.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  c.frame(x0, y0, x1, y1, 0.1f);
}

void draw_scatter(Canvas& c, Rng& rng, int x0, int y0, int x1, int y1) {
  c.frame(x0, y0, x1, y1, 0.2f);
  const int n = 30 + static_cast<int>(rng.below(50));
  const double slope = rng.uniform(-0.8, 0.8);
  for (int i = 0; i < n; ++i) {
    const double t = rng.uniform();
    const double v = std::clamp(0.5 + slope * (t - 0.5) + 0.15 * rng.normal(), 0.05, 0.95);
    c.disk(x0 + t * (x1 - x0), y1 - v * (y1 - y0), rng.uniform(2.0, 3.5), rng.bernoulli(0.5) ? 0.1f : 0.45f);
  }
}

void draw_table(Canvas& c, Rng& rng, int x0, int y0, int x1, int y1) {
  c.fill_rect(x0, y0, x1, y0 + 2, kInk);
  c.fill_rect(x0, y0 + 16, x1, y0 + 17, kInk);
  c.fill_rect(x0, y1 - 2, x1, y1, kInk);
  const int cols = 3 + static_cast<int>(rng.below(3));
  const int cw = (x1 - x0) / cols;
  for (int y = y0 + 4; y + 10 < y1 - 2; y += 14) {
    for (int col = 0; col < cols; ++col) draw_word(c, rng, x0 + col * cw + 3, y, 7, x0 + (col + 1) * cw - 3);
  }
}

void draw_figure(Canvas& c, Rng& rng, int x0, int y0, int x1, int y1) {
  switch (rng.below(5)) {
    case 0: draw_plot(c, rng, x0, y0, x1, y1); break;
    case 1: draw_bars(c, rng, x0, y0, x1, y1); break;
    case 2: draw_texture(c, rng, x0, y0, x1, y1); break;
    case 3: draw_scatter(c, rng, x0, y0, x1, y1); break;
    default: draw_table(c, rng, x0, y0, x1, y1); break;
  }
}

void render_dense(Canvas& c, Rng& rng, int page_index) {
  const int W = c.img.width, H = c.img.height;
  const int mx = W * 8 / 100, top = H * 6 / 100, bottom = H - H * 6 / 100;
  int y = top;
  if (page_index == 0) {
    draw_text_line(c, rng, W / 5, W - W / 5, y, 14, 1.0);
    y += 26;
    draw_text_line(c, rng, W / 3, W - W / 3, y, 9, 1.0);
    y += 22;
  }
  const int gap = W * 4 / 100;
  const int col_w = (W - 2 * mx - gap) / 2;

  struct Box {
    int x0, y0, x1, y1;
  };
  std::vector<Box> figures;
  const int n_fig = 1 + static_cast<int>(rng.below(2));
  for (int f = 0; f < n_fig; ++f) {
    const bool wide = rng.bernoulli(0.35);
    const int h = 70 + static_cast<int>(rng.below(90));
    const int fy = y + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, bottom - y - h))));
    const int col = static_cast<int>(rng.below(2));
    Box b = wide ? Box{mx, fy, W - mx, fy + h}
                 : Box{mx + col * (col_w + gap), fy, mx + col * (col_w + gap) + col_w, fy + h};
    const bool clash = std::any_of(figures.begin(), figures.end(), [&](const Box& o) {
      return b.x0 < o.x1 && o.x0 < b.x1 && b.y0 < o.y1 + 12 && o.y0 < b.y1 + 12;
    });
    if (clash) continue;
    draw_figure(c, rng, b.x0 + 4, b.y0 + 4, b.x1 - 4, b.y1 - 14);
    draw_text_line(c, rng, b.x0 + 10, b.x1 - 10, b.y1 - 10, 6, 0.8);
    figures.push_back(b);
  }

  for (int col = 0; col < 2; ++col) {
    const int x0 = mx + col * (col_w + gap), x1 = x0 + col_w;
    for (int ly = y; ly + 10 < bottom; ly += 16) {
      const bool blocked = std::any_of(figures.begin(), figures.end(), [&](const Box& b) {
        return x0 < b.x1 && b.x0 < x1 && ly + 8 > b.y0 - 4 && ly < b.y1 + 4;
      });
      if (blocked) continue;
      if (rng.bernoulli(0.06)) continue;  // paragraph break
      draw_text_line(c, rng, x0, x1, ly, 9, rng.bernoulli(0.12) ? rng.uniform(0.3, 0.8) : 1.0);
    }
  }
}

void render_sparse(Canvas& c, Rng& rng, int page_index) {
  const int W = c.img.width, H = c.img.height;
  const int mx = W * 10 / 100;
  switch ((rng.below(4) + static_cast<std::uint64_t>(page_index)) % 4) {
    case 0: {
      draw_text_line(c, rng, W / 4, W - W / 4, H / 10, 14, 1.0);
      const int lines = 4 + static_cast<int>(rng.below(7));
      for (int i = 0; i < lines; ++i) draw_text_line(c, rng, W / 5, W - W / 5, H / 10 + 40 + i * 18, 9, 1.0);
      break;
    }
    case 1: {
      const int lines = 3 + static_cast<int>(rng.below(6));
      for (int i = 0; i < lines; ++i) {
        const int y = 20 + static_cast<int>(rng.below(static_cast<std::uint64_t>(H - 40)));
        draw_text_line(c, rng, mx, W - mx, y, 9, rng.uniform(0.2, 0.9));
      }
      break;
    }
    case 2: {
      draw_text_line(c, rng, W / 3, W - W / 3, H / 12, 10, 1.0);
      c.frame(mx, H / 5, W - mx, H / 5 + static_cast<int>(rng.uniform(0.2, 0.6) * H), 0.3f);
      break;
    }
    default: {
      const int lines = 6 + static_cast<int>(rng.below(12));
      const int x1 = mx + static_cast<int>((W - 2 * mx) * rng.uniform(0.35, 0.55));
      for (int i = 0; i < lines; ++i) draw_text_line(c, rng, mx, x1, 30 + i * 16, 9, 1.0);
      break;
    }
  }
}

}  // namespace

GrayImage render_page(bool dense, int page_index, Rng& rng, int width, int height) {
  if (width < 64 || height < 64) throw ValidationError("synthetic pages must be at least 64x64");
  GrayImage img(width, height, 1.0f);
  Canvas c{img};
  if (dense) {
    render_dense(c, rng, page_index);
  } else {
    render_sparse(c, rng, page_index);
  }
  return img;
}

SyntheticCorpus generate_synthetic_corpus(const std::filesystem::path& dir, const SyntheticOptions& options, int jobs) {
  if (options.documents < 8 || options.documents % 4 != 0) {
    throw ValidationError("synthetic corpus size must be a positive multiple of 4 (at least 8)");
  }
  if (options.pages < 1) throw ValidationError("synthetic documents need at least one page");
  SyntheticCorpus corpus;
  corpus.root = dir;
  corpus.manifest = dir / "manifest.jsonl";
  corpus.lexicons = synthetic_lexicons(options);
  std::error_code ec;
  std::filesystem::create_directories(dir / "text", ec);
  std::filesystem::create_directories(dir / "pages", ec);
  if (ec) throw RuntimeFailure("cannot create '" + dir.string() + "': " + ec.message());

  struct Doc {
    std::string id;
    std::size_t domain;
    bool high;
    nlohmann::json row;
  };
  std::vector<Doc> docs;
  const std::size_t per_domain = options.documents / 2;
  for (std::size_t d = 0; d < 2; ++d) {
    for (std::size_t j = 0; j < per_domain; ++j) {
      char id[64];
      std::snprintf(id, sizeof id, "%s-%04zu", options.domains[d].c_str(), j);
      docs.push_back({id, d, j % 2 == 0, {}});
    }
  }

  parallel_for(docs.size(), jobs, [&](std::size_t i) {
    auto& doc = docs[i];
    Rng rng(mix_seed(options.seed, "doc:" + doc.id));
    const std::string text_rel = "text/" + doc.id + ".txt";
    {
      std::ofstream out(dir / text_rel, std::ios::binary);
      out << synthetic_text(corpus.lexicons[doc.domain], doc.high, rng, options);
      if (!out) throw RuntimeFailure("cannot write '" + (dir / text_rel).string() + "'");
    }
    const bool dense = doc.high != rng.bernoulli(options.visual_noise);
    std::vector<std::string> pages;
    for (int p = 0; p < options.pages; ++p) {
      const std::string rel = "pages/" + doc.id + "-" + std::to_string(p + 1) + ".png";
      save_gray_png(dir / rel, render_page(dense, p, rng, options.page_width, options.page_height));
      pages.push_back(rel);
    }
    doc.row = {{"id", doc.id},
               {"domain", options.domains[doc.domain]},
               {"year", 2000 + static_cast<int>(rng.below(14))},
               {"citations", doc.high ? 11 + static_cast<int>(rng.below(190)) : 0},
               {"text", text_rel},
               {"pages", pages}};
  });

  std::ofstream out(corpus.manifest, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write '" + corpus.manifest.string() + "'");
  for (const auto& doc : docs) out << doc.row.dump() << '\n';
  if (!out) throw RuntimeFailure("failed writing '" + corpus.manifest.string() + "'");
  return corpus;
}

}  // namespace impact
