import { Router } from "./router.js";

const nav = document.getElementById("nav");
const outlet = document.getElementById("app");
if (!nav || !outlet) {
  throw new Error("index.html must provide #nav and #app mount points");
}

void new Router(nav, outlet).start();
