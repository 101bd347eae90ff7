import { ApiClient } from "./api";
import { App } from "./app";

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app mount point");
}
// served from the same origin as the API by `serve --frontend`
new App(root, new ApiClient(""), { pollMs: 3000 });
