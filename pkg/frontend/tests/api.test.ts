import { describe, expect, it } from "vitest";

import { AnnotationClient, ApiError } from "../src/api.js";

function fakeFetch(routes: Record<string, { status?: number; body: unknown }>) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const route = routes[url.replace(/^https?:\/\/[^/]+/, "")];
    if (!route) throw new Error(`no fake route for ${url}`);
    return new Response(JSON.stringify(route.body), {
      status: route.status ?? 200,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { impl, calls };
}

describe("annotation client", () => {
  it("opens sessions with a POST body", async () => {
    const { impl, calls } = fakeFetch({
      "/sessions": { status: 201, body: { session_id: "abc", boxes: [] } },
    });
    const client = new AnnotationClient("http://svc", impl);
    const session = await client.openSession("scene_1");
    expect(session.session_id).toBe("abc");
    expect(calls[0]?.init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({ image_id: "scene_1" });
  });

  it("sends annotations in the service wire format", async () => {
    const { impl, calls } = fakeFetch({
      "/sessions/abc/annotations": {
        body: { est_height_m: 12.5, shadow_length_m: 12.5, cursor: 1 },
      },
    });
    const client = new AnnotationClient("http://svc", impl);
    const result = await client.submitAnnotation("abc", 0, [100, 100], [103, 104], 4.5);
    expect(result.est_height_m).toBe(12.5);
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({
      bbox_index: 0,
      shadow_start_px: [100, 100],
      shadow_end_px: [103, 104],
      vertical_edge_px: 4.5,
    });
  });

  it("omits the vertical edge when not marked", async () => {
    const { impl, calls } = fakeFetch({
      "/sessions/abc/annotations": { body: { est_height_m: 1 } },
    });
    await new AnnotationClient("http://svc", impl).submitAnnotation(
      "abc", 2, [0, 0], [1, 1]);
    expect(JSON.parse(String(calls[0]?.init?.body))).not.toHaveProperty("vertical_edge_px");
  });

  it("raises ApiError with the service's error body", async () => {
    const { impl } = fakeFetch({
      "/sessions/abc/annotations": {
        status: 409,
        body: { error: "SunBelowHorizon", message: "sun is down" },
      },
    });
    const client = new AnnotationClient("http://svc", impl);
    await expect(client.submitAnnotation("abc", 0, [0, 0], [1, 1]))
      .rejects.toMatchObject({ status: 409, body: { error: "SunBelowHorizon" } });
    try {
      await client.submitAnnotation("abc", 0, [0, 0], [1, 1]);
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).message).toContain("SunBelowHorizon");
    }
  });

  it("builds image URLs from the base", () => {
    const client = new AnnotationClient("http://svc:8008");
    expect(client.imageUrl("scene_1")).toBe("http://svc:8008/images/scene_1");
  });
});
