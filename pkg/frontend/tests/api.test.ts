import { describe, expect, it } from "vitest";

import { ApiClient, ApiRequestError, dataUrlToBase64 } from "../src/api.js";
import { FakeServer } from "./fakeServer.js";

describe("ApiClient", () => {
  it("posts both images and returns the parsed extraction", async () => {
    const server = new FakeServer();
    const client = new ApiClient("", server.fetch);
    const resp = await client.extract("Rk9OVA==", "QkFDSw==");
    expect(resp.id).toBe("entry0001");
    expect(resp.front.fields.district.corrected_text).toBe("Kaski");
    expect(server.requests[0]).toMatchObject({
      method: "POST",
      path: "/api/v1/extract",
      body: { front_image: "Rk9OVA==", back_image: "QkFDSw==" },
    });
  });

  it("raises ApiRequestError with the server's error code", async () => {
    const server = new FakeServer();
    server.failExtractWith = { status: 422, code: "no_card_found", side: "front" };
    const client = new ApiClient("", server.fetch);
    const err = await client.extract("YQ==", "Yg==").catch((e) => e);
    expect(err).toBeInstanceOf(ApiRequestError);
    expect(err.status).toBe(422);
    expect(err.error.code).toBe("no_card_found");
    expect(err.error.side).toBe("front");
  });

  it("falls back to unknown_error for non-JSON error bodies", async () => {
    const client = new ApiClient("", async () => new Response("boom", { status: 500 }));
    const err = await client.history().catch((e) => e);
    expect(err).toBeInstanceOf(ApiRequestError);
    expect(err.error.code).toBe("unknown_error");
  });

  it("saveEntry returns the plain-text record", async () => {
    const server = new FakeServer();
    const client = new ApiClient("", server.fetch);
    const { id } = await client.extract("YQ==", "Yg==");
    const text = await client.saveEntry(id);
    expect(text).toContain("district: Kaski");
    expect(text).toContain("name: राम बहादुर थापा");
  });

  it("editEntry PATCHes the field map", async () => {
    const server = new FakeServer();
    const client = new ApiClient("", server.fetch);
    const { id } = await client.extract("YQ==", "Yg==");
    const entry = await client.editEntry(id, { district: "Lalitpur" });
    expect(entry.edited_fields).toEqual({ district: "Lalitpur" });
    expect(entry.status).toBe("edited");
  });

  it("history respects the limit parameter", async () => {
    const server = new FakeServer();
    const client = new ApiClient("", server.fetch);
    await client.extract("YQ==", "Yg==");
    await client.extract("YQ==", "Yg==");
    await client.extract("YQ==", "Yg==");
    expect(await client.history(2)).toHaveLength(2);
  });
});

describe("dataUrlToBase64", () => {
  it("strips the data-URL prefix", () => {
    expect(dataUrlToBase64("data:image/png;base64,QUJD")).toBe("QUJD");
  });

  it("passes through bare base64", () => {
    expect(dataUrlToBase64("QUJD")).toBe("QUJD");
  });
});
