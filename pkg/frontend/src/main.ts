import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  void createApp(root, new ApiClient("")).catch((err) => {
    root.textContent = `failed to load session: ${err}`;
  });
}
