import { ApiClient } from "./api.js";
import { mount } from "./app.js";

const baseUrl = new URLSearchParams(window.location.search).get("service")
  ?? "http://127.0.0.1:8414";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app element");
}
void mount(root, new ApiClient(baseUrl));
