import type { Catalog, DecisionModel } from "./types.js";

// Visual language of the decision models: a single-headed arrow from a
// pattern to a requirement it satisfies, carrying a +/- qualification
// badge; double-headed arrows between patterns for complements and
// alternatives; a trapezium attached to a pattern for an adoption
// condition. Layout is layered: patterns left, quality attributes right.

export interface GraphNode {
  id: string;
  kind: "pattern" | "attribute" | "constraint";
  label: string;
  x: number;
  y: number;
}

export interface GraphEdge {
  kind: "satisfies" | "complements" | "alternative" | "constraint";
  from: string;
  to: string;
  badge?: "+" | "-";
  scope?: string | null;
}

export interface GraphView {
  decisionModelId: string;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

const COLUMN_PATTERNS = 40;
const COLUMN_ATTRIBUTES = 460;
const ROW_HEIGHT = 56;
const TOP = 40;

export function buildGraphView(catalog: Catalog, modelId: string): GraphView {
  const model = catalog.decision_models.find((m) => m.id === modelId);
  if (!model) {
    throw new Error(`unknown decision model ${modelId}`);
  }
  return {
    decisionModelId: modelId,
    nodes: buildNodes(catalog, model),
    edges: buildEdges(model),
  };
}

function buildNodes(catalog: Catalog, model: DecisionModel): GraphNode[] {
  const nodes: GraphNode[] = [];
  const patterns = [...model.member_pattern_ids].sort();
  patterns.forEach((pid, i) => {
    const pattern = catalog.patterns.find((p) => p.id === pid);
    nodes.push({
      id: pid,
      kind: "pattern",
      label: pattern ? pattern.name : pid,
      x: COLUMN_PATTERNS,
      y: TOP + i * ROW_HEIGHT * 2,
    });
  });

  const attributes = [...new Set(model.effects.map((e) => e.attribute_id))].sort();
  attributes.forEach((aid, i) => {
    const attr = catalog.attributes.find((a) => a.id === aid);
    nodes.push({
      id: aid,
      kind: "attribute",
      label: attr ? attr.name : aid,
      x: COLUMN_ATTRIBUTES,
      y: TOP + i * ROW_HEIGHT,
    });
  });

  model.constraints.forEach((con, i) => {
    const anchor = nodes.find((n) => n.id === con.pattern_id);
    nodes.push({
      id: `constraint:${con.pattern_id}:${con.key}`,
      kind: "constraint",
      label: con.key,
      x: COLUMN_PATTERNS + 30,
      y: (anchor ? anchor.y : TOP + i * ROW_HEIGHT) + ROW_HEIGHT,
    });
  });
  return nodes;
}

function buildEdges(model: DecisionModel): GraphEdge[] {
  const edges: GraphEdge[] = [];
  for (const e of model.effects) {
    edges.push({
      kind: "satisfies",
      from: e.pattern_id,
      to: e.attribute_id,
      badge: e.direction === "benefit" ? "+" : "-",
    });
  }
  for (const r of model.relations) {
    edges.push({
      kind: r.kind === "complements" ? "complements" : "alternative",
      from: r.from_pattern,
      to: r.to_pattern,
      scope: r.scope_attribute,
    });
  }
  for (const c of model.constraints) {
    edges.push({
      kind: "constraint",
      from: `constraint:${c.pattern_id}:${c.key}`,
      to: c.pattern_id,
    });
  }
  return edges;
}

export function countsOf(view: GraphView): {
  patterns: number;
  attributes: number;
  satisfies: number;
  relations: number;
  constraints: number;
} {
  return {
    patterns: view.nodes.filter((n) => n.kind === "pattern").length,
    attributes: view.nodes.filter((n) => n.kind === "attribute").length,
    satisfies: view.edges.filter((e) => e.kind === "satisfies").length,
    relations: view.edges.filter(
      (e) => e.kind === "complements" || e.kind === "alternative",
    ).length,
    constraints: view.edges.filter((e) => e.kind === "constraint").length,
  };
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderGraphSvg(doc: Document, view: GraphView,
                               highlighted: Set<string>): SVGSVGElement {
  const byId = new Map(view.nodes.map((n) => [n.id, n]));
  const height = Math.max(...view.nodes.map((n) => n.y)) + 80;
  const svg = doc.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("viewBox", `0 0 760 ${height}`);
  svg.setAttribute("class", "decision-graph");
  svg.dataset.model = view.decisionModelId;

  for (const edge of view.edges) {
    const a = byId.get(edge.from);
    const b = byId.get(edge.to);
    if (!a || !b) continue;
    const line = doc.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(a.x + (a.kind === "pattern" ? 180 : 0)));
    line.setAttribute("y1", String(a.y + 14));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y + 14));
    line.setAttribute("class", `edge edge-${edge.kind}`);
    line.dataset.from = edge.from;
    line.dataset.to = edge.to;
    if (edge.kind === "constraint") line.setAttribute("stroke-dasharray", "6 4");
    svg.appendChild(line);
    if (edge.badge) {
      const badge = doc.createElementNS(SVG_NS, "text");
      badge.setAttribute("x", String((a.x + 180 + b.x) / 2));
      badge.setAttribute("y", String((a.y + b.y) / 2 + 10));
      badge.setAttribute("class", `badge badge-${edge.badge === "+" ? "plus" : "minus"}`);
      badge.textContent = edge.badge;
      svg.appendChild(badge);
    }
  }

  for (const node of view.nodes) {
    const group = doc.createElementNS(SVG_NS, "g");
    group.setAttribute("class",
      `node node-${node.kind}` +
      (node.kind === "pattern" && highlighted.has(node.id) ? " chosen" : ""));
    group.dataset.id = node.id;
    let shape: Element;
    if (node.kind === "constraint") {
      // trapezium marks an adoption condition
      shape = doc.createElementNS(SVG_NS, "polygon");
      shape.setAttribute("points",
        `${node.x + 12},${node.y} ${node.x + 168},${node.y} ` +
        `${node.x + 180},${node.y + 28} ${node.x},${node.y + 28}`);
    } else {
      shape = doc.createElementNS(SVG_NS, "rect");
      shape.setAttribute("x", String(node.x));
      shape.setAttribute("y", String(node.y));
      shape.setAttribute("width", node.kind === "pattern" ? "180" : "220");
      shape.setAttribute("height", "28");
      if (node.kind === "attribute") shape.setAttribute("rx", "14");
    }
    group.appendChild(shape);
    const text = doc.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(node.x + (node.kind === "attribute" ? 110 : 90)));
    text.setAttribute("y", String(node.y + 19));
    text.setAttribute("text-anchor", "middle");
    text.textContent = node.label;
    group.appendChild(text);
    svg.appendChild(group);
  }
  return svg;
}
