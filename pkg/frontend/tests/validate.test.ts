import { describe, expect, it } from "vitest";
import { BrowserExport } from "../src/types.js";
import { validateExport } from "../src/validate.js";
import { loadFixtureExport } from "./fixtures.js";

function clone(data: BrowserExport): BrowserExport {
  return JSON.parse(JSON.stringify(data)) as BrowserExport;
}

describe("validateExport", () => {
  it("accepts the bundled export with zero violations", () => {
    expect(validateExport(loadFixtureExport())).toEqual([]);
  });

  it("flags a schema version mismatch", () => {
    const data = clone(loadFixtureExport());
    data.model.schema_version = 99;
    expect(validateExport(data).join(" ")).toContain("schema_version");
  });

  it("flags a theta vector off the simplex", () => {
    const data = clone(loadFixtureExport());
    data.documents.documents[0]!.theta[0]! += 0.1;
    expect(validateExport(data).join(" ")).toContain("simplex");
  });

  it("flags a negative theta entry", () => {
    const data = clone(loadFixtureExport());
    const theta = data.documents.documents[0]!.theta;
    theta[0] = -0.05;
    theta[1] = theta[1]! + 0.05;
    expect(validateExport(data).join(" ")).toContain("simplex");
  });

  it("flags an AND edge missing from the OR set", () => {
    const data = clone(loadFixtureExport());
    data.graph.and_edges.push({ source: 0, target: 1, weight: 0.5 });
    data.graph.or_edges = data.graph.or_edges.filter(
      (e) => !(e.source === 0 && e.target === 1),
    );
    expect(validateExport(data).join(" ")).toContain("subset");
  });

  it("flags an edge referencing an unknown topic", () => {
    const data = clone(loadFixtureExport());
    data.graph.or_edges.push({ source: 0, target: 42, weight: 0.1 });
    expect(validateExport(data).join(" ")).toContain("unknown topic");
  });

  it("flags topic ids that are not 0..K-1", () => {
    const data = clone(loadFixtureExport());
    data.model.topics[0]!.id = 77;
    expect(validateExport(data).join(" ")).toContain("topic ids");
  });

  it("flags a moment vector of the wrong length", () => {
    const data = clone(loadFixtureExport());
    data.moments.moments[0]!.m.push(0.1);
    expect(validateExport(data).join(" ")).toContain("moment length");
  });

  it("flags negative moments", () => {
    const data = clone(loadFixtureExport());
    data.moments.moments[0]!.m[0] = -0.2;
    expect(validateExport(data).join(" ")).toContain("negative");
  });

  it("flags moments for an unknown document", () => {
    const data = clone(loadFixtureExport());
    data.moments.moments[0]!.id = "no-such-doc";
    expect(validateExport(data).join(" ")).toContain("unknown document");
  });

  it("flags a document count disagreeing with the manifest", () => {
    const data = clone(loadFixtureExport());
    data.manifest.D += 1;
    expect(validateExport(data).join(" ")).toContain("D disagrees");
  });

  it("flags top_topics referencing a missing topic", () => {
    const data = clone(loadFixtureExport());
    data.documents.documents[0]!.top_topics.push(42);
    expect(validateExport(data).join(" ")).toContain("references topic 42");
  });
});
