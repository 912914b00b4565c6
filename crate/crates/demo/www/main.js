import init, { plan_outline, run_search, evolve_archive } from "./pkg/scenforge_demo.js";

const $ = (id) => document.getElementById(id);

function bindSlider(id) {
  const input = $(id);
  const out = $(id + "-out");
  const render = () => {
    const v = Number(input.value);
    out.textContent = id.endsWith("-c") || id.endsWith("-tau")
      ? (v / 100).toFixed(2)
      : String(v);
  };
  input.addEventListener("input", render);
  render();
}

function parseReply(raw, statEl) {
  const data = JSON.parse(raw);
  if (data.error) {
    statEl.innerHTML = `<span class="error">${data.error}</span>`;
    return null;
  }
  return data;
}

// Shared blue-to-warm color scale for values in [0, 1].
function heat(v) {
  const t = Math.max(0, Math.min(1, v));
  const hue = 220 - 180 * t;
  return `hsl(${hue} 70% ${35 + 25 * t}%)`;
}

// ---- outline planner --------------------------------------------------------

function renderPlan() {
  const stat = $("plan-stat");
  const data = parseReply(
    plan_outline($("plan-title").value, $("plan-theme").value, Number($("plan-seed").value)),
    stat
  );
  if (!data) return;
  stat.textContent = `${data.node_count} nodes, ${data.outline.sections.length} outline sections`;

  // Nested list from the parent links.
  const children = new Map();
  data.nodes.forEach((node, index) => {
    if (node.parent === null || node.parent === undefined) return;
    if (!children.has(node.parent)) children.set(node.parent, []);
    children.get(node.parent).push(index);
  });
  const renderNode = (index) => {
    const node = data.nodes[index];
    const li = document.createElement("li");
    li.textContent = node.label;
    if (node.payload && node.payload !== node.label) {
      const span = document.createElement("span");
      span.className = "payload";
      span.textContent = ` = ${node.payload}`;
      li.appendChild(span);
    }
    const kids = children.get(index) || [];
    if (kids.length) {
      const ul = document.createElement("ul");
      ul.className = "tree";
      kids.forEach((k) => ul.appendChild(renderNode(k)));
      li.appendChild(ul);
    }
    return li;
  };
  const root = document.createElement("ul");
  root.className = "tree";
  root.appendChild(renderNode(0));
  $("plan-tree").replaceChildren(root);

  const sections = document.createElement("ol");
  sections.style.fontSize = "0.85rem";
  data.outline.sections.forEach((section) => {
    const li = document.createElement("li");
    li.textContent = section.payload && section.payload !== section.label
      ? `${section.label} = ${section.payload}`
      : section.label;
    sections.appendChild(li);
  });
  $("plan-outline").replaceChildren(sections);
}

// ---- tree search -------------------------------------------------------------

function renderSearch() {
  const stat = $("search-stat");
  const data = parseReply(
    run_search(
      Number($("search-seed").value),
      Number($("search-sims").value),
      Number($("search-u").value),
      Number($("search-depth").value),
      Number($("search-c").value),
      Number($("search-tau").value)
    ),
    stat
  );
  if (!data) return;
  stat.textContent =
    `${data.nodes.length} nodes, root visits ${data.nodes[0].visits}, ` +
    `${data.lookaheads} look-ahead(s); node area tracks visit count, color tracks value`;

  // Layout: x by in-order leaf position, y by depth.
  const canvas = $("search-tree");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const children = new Map();
  data.nodes.forEach((node, index) => {
    if (node.parent === null || node.parent === undefined) return;
    if (!children.has(node.parent)) children.set(node.parent, []);
    children.get(node.parent).push(index);
  });
  const xs = new Array(data.nodes.length).fill(0);
  let cursor = 0;
  const assign = (index) => {
    const kids = children.get(index) || [];
    if (!kids.length) { xs[index] = cursor++; return xs[index]; }
    const positions = kids.map(assign);
    xs[index] = positions.reduce((a, b) => a + b, 0) / positions.length;
    return xs[index];
  };
  assign(0);
  const leafCount = Math.max(cursor, 1);
  const depthMax = Math.max(...data.nodes.map((n) => n.depth), 1);
  const px = (x) => 30 + (x / Math.max(leafCount - 1, 1)) * (canvas.width - 60);
  const py = (d) => 26 + (d / depthMax) * (canvas.height - 60);

  const onBestPath = new Set(data.best_path);
  ctx.lineWidth = 1;
  data.nodes.forEach((node, index) => {
    if (node.parent === null || node.parent === undefined) return;
    ctx.strokeStyle = onBestPath.has(index) ? "#c05621" : "#cbd5e0";
    ctx.lineWidth = onBestPath.has(index) ? 2.5 : 1;
    ctx.beginPath();
    ctx.moveTo(px(xs[node.parent]), py(data.nodes[node.parent].depth));
    ctx.lineTo(px(xs[index]), py(node.depth));
    ctx.stroke();
  });
  const maxVisits = Math.max(...data.nodes.map((n) => n.visits), 1);
  data.nodes.forEach((node, index) => {
    const r = 3 + 9 * Math.sqrt(node.visits / maxVisits);
    ctx.fillStyle = node.depth === 0 ? "#718096" : heat(node.value);
    ctx.beginPath();
    ctx.arc(px(xs[index]), py(node.depth), r, 0, Math.PI * 2);
    ctx.fill();
    if (onBestPath.has(index)) {
      ctx.strokeStyle = "#c05621";
      ctx.lineWidth = 2;
      ctx.stroke();
    }
  });

  // Reward scatter per simulation; look-ahead sims marked.
  const rc = $("search-rewards");
  const rctx = rc.getContext("2d");
  rctx.clearRect(0, 0, rc.width, rc.height);
  rctx.strokeStyle = "#e2e8f0";
  rctx.beginPath();
  rctx.moveTo(28, rc.height - 20);
  rctx.lineTo(rc.width - 8, rc.height - 20);
  rctx.moveTo(28, 8);
  rctx.lineTo(28, rc.height - 20);
  rctx.stroke();
  rctx.fillStyle = "#4a5568";
  rctx.font = "10px system-ui";
  rctx.fillText("reward per simulation (orange = look-ahead fired)", 34, 12);
  const n = data.sims.length;
  data.sims.forEach((sim, i) => {
    const x = 28 + ((i + 0.5) / n) * (rc.width - 40);
    const y = rc.height - 20 - sim.r_e * (rc.height - 36);
    rctx.fillStyle = sim.lookahead ? "#c05621" : "#2b6cb0";
    rctx.fillRect(x - 1.5, y - 1.5, 3, 3);
  });

  $("search-extract").textContent = `Extracted path: ${data.extracted}`;
}

// ---- archive evolution ---------------------------------------------------------

function renderArchive() {
  const stat = $("arch-stat");
  const data = parseReply(
    evolve_archive(
      Number($("arch-seed").value),
      Number($("arch-bins").value),
      Number($("arch-iters").value),
      Number($("arch-mutants").value)
    ),
    stat
  );
  if (!data) return;
  const occupied = data.cells.length;
  stat.textContent =
    `${occupied}/${data.capacity} niches occupied, ${data.replacements} strict replacements; ` +
    `slices show the knowledge-density axis (phi2), cells colored by elite fitness`;

  // One bins x bins slice per phi2 layer.
  const canvas = $("arch-grid");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const bins = data.bins;
  const sliceGap = 14;
  const sliceW = Math.min(
    (canvas.width - sliceGap * (bins + 1)) / bins,
    canvas.height - 46
  );
  const cellW = sliceW / bins;
  const byNiche = new Map(data.cells.map((c) => [c.niche.join(","), c]));
  for (let j = 0; j < bins; j++) {
    const ox = sliceGap + j * (sliceW + sliceGap);
    const oy = 26;
    ctx.fillStyle = "#4a5568";
    ctx.font = "10px system-ui";
    ctx.fillText(`phi2 bin ${j}`, ox, 16);
    for (let i = 0; i < bins; i++) {
      for (let k = 0; k < bins; k++) {
        const cell = byNiche.get([i, j, k].join(","));
        ctx.fillStyle = cell ? heat(cell.fitness) : "#edf2f7";
        ctx.fillRect(ox + i * cellW, oy + k * cellW, cellW - 1, cellW - 1);
        if (cell && cell.provenance === "seed") {
          ctx.strokeStyle = "#1a202c";
          ctx.strokeRect(ox + i * cellW + 1, oy + k * cellW + 1, cellW - 3, cellW - 3);
        }
      }
    }
  }

  // Coverage curve over generations.
  const cc = $("arch-coverage");
  const cctx = cc.getContext("2d");
  cctx.clearRect(0, 0, cc.width, cc.height);
  cctx.strokeStyle = "#e2e8f0";
  cctx.beginPath();
  cctx.moveTo(30, cc.height - 22);
  cctx.lineTo(cc.width - 8, cc.height - 22);
  cctx.moveTo(30, 10);
  cctx.lineTo(30, cc.height - 22);
  cctx.stroke();
  cctx.fillStyle = "#4a5568";
  cctx.font = "10px system-ui";
  cctx.fillText("occupied niches per generation", 36, 12);
  cctx.strokeStyle = "#2b6cb0";
  cctx.lineWidth = 2;
  cctx.beginPath();
  const m = data.series.length;
  data.series.forEach((point, i) => {
    const x = 30 + ((i + 1) / m) * (cc.width - 44);
    const y = cc.height - 22 - (point.occupied / data.capacity) * (cc.height - 40);
    if (i === 0) cctx.moveTo(x, y); else cctx.lineTo(x, y);
  });
  cctx.stroke();
}

async function main() {
  await init();
  ["search-sims", "search-u", "search-depth", "search-c", "search-tau",
   "arch-bins", "arch-iters", "arch-mutants"].forEach(bindSlider);
  $("plan-run").addEventListener("click", renderPlan);
  $("search-run").addEventListener("click", renderSearch);
  $("arch-run").addEventListener("click", renderArchive);
  renderPlan();
  renderSearch();
  renderArchive();
}

main();
