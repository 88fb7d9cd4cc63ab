// expect: UnbalancedBraces
using UnityEngine;

public class Jumper : MonoBehaviour
{
    private void Update()
    {
        if (Input.GetButtonDown("Jump"))
        {
            Debug.Log("jump");
    }
}
