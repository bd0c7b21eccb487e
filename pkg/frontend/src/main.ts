import { TimelensClient } from "./api.js";
import { ExplorerApp } from "./app.js";

window.addEventListener("DOMContentLoaded", () => {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  new ExplorerApp(root, new TimelensClient(""));
});
